"""From a density matrix back to its exponential ensemble.

solve_single finds the Hermitian X with grad K(X) = rho.  The solution
commutes with rho, sits on the surface K = 1, and the ensemble
exp(<phi|X|phi>) reproduces rho as its barycenter.
"""

import numpy as np

from contens import ContinuousEnsemble, EvalConfig, barycenter, differential_entropy
from contens import k_closed_single, solve_single
from contens.operators import hs_inner

rho = np.array([[0.6, 0.2 - 0.1j, 0.0],
                [0.2 + 0.1j, 0.3, 0.05],
                [0.0, 0.05, 0.1]])
report = solve_single(rho)
x = report.x
ev = k_closed_single(x)
print(f"Newton steps: {report.iterations}, residual {report.grad_residual:.1e}, K(X) = {ev.k_value:.15f}")
print("X =\n", np.round(x.entries, 4))
print(f"commutator norm |[X, rho]| = {np.linalg.norm(x.entries @ rho - rho @ x.entries):.1e}")

ens = ContinuousEnsemble.exponential(x)
mc = barycenter(ens, EvalConfig(samples=400_000, seed=3))
print(f"MC barycenter vs rho: max entry deviation {np.max(np.abs(mc.mean.entries - rho)):.1e}"
      f" (stderr {mc.std_error:.1e})")

h = differential_entropy(ens, EvalConfig(samples=400_000, seed=4), ev)
print(f"entropy: MC {h.value:.5f} +- {h.std_error:.1e}, -<X, rho> = {-hs_inner(x, rho):.5f}")
