"""Robust separability along the Werner family.

p |psi-><psi-| + (1 - p) I/4 is separable for p <= 1/3.  Above that the
partial transpose turns negative; below it the sample-average problem has a
minimizer and the state is classified robustly separable.  The singlet
itself makes the solver run off to infinity.
"""

import numpy as np

from contens import EvalConfig, classify_robust_separability, solve_bipartite_saa, werner_state

cfg = EvalConfig(samples=50_000, seed=5)
print(f"{'p':>5} {'ppt_min':>9}  verdict")
for p in np.round(np.linspace(0, 1, 11), 2):
    v = classify_robust_separability(werner_state(p), cfg)
    print(f"{p:5.2f} {v.ppt_min_eigenvalue:9.4f}  {v.verdict}"
          + (f" (|X| = {v.x.frobenius():.2f})" if v.x is not None else ""))

r = solve_bipartite_saa(werner_state(1.0), cfg)
print(f"\nsinglet: {r.status} after {r.iterations} steps, |X| trace {np.round(r.norm_trace[-4:], 1)}")
