"""A polynomial ensemble with exactly computable barycenter.

In the eigenbasis of rho the density A * sum_k (p_k - c) |<e_k|phi>|^(2M)
reproduces rho exactly, provided every p_k exceeds c = 1/(n(L+1)).  Small
eigenvalues therefore need a larger L.
"""

import numpy as np

from contens import BoundViolation, barycenter, smeared_from_density

rho = np.diag([0.75, 0.25])
e = smeared_from_density(rho, 2)
print(f"M = {e.exponent}, weights {e.weights}")
print("analytic barycenter:\n", barycenter(e).mean.entries.real)

rho = np.diag([0.9, 0.1])
for L in (2, 5):
    try:
        e = smeared_from_density(rho, L)
        print(f"L={L}: ok, barycenter residual {e.check_residual:.1e}")
    except BoundViolation as exc:
        print(f"L={L}: rejected, minimal admissible L = {exc.min_L}")
