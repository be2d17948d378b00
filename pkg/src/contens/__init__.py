"""Continuous-ensemble representation of density matrices.

Density matrices are represented as barycenters of exponential-family
densities on unit spheres; the exponential functional ``K`` and its gradient,
the inverse map ``rho -> X`` and a robust-separability classifier for
bipartite states are provided.
"""

from .ensembles import (
    BarycenterResult,
    ContinuousEnsemble,
    barycenter,
    density_at,
    differential_entropy,
    read_ensemble,
    smeared_from_density,
    write_ensemble,
)
from .errors import *  # noqa: F401,F403
from .haar import (
    ProductSampler,
    SphereSampler,
    dirichlet_moment,
    sample_product,
    sample_unit_vector,
)
from .kfunc import (
    EvalConfig,
    KEvaluation,
    SampleSet,
    grad_fd_check,
    k_closed_single,
    k_eval,
    k_mc,
    k_on_samples,
    normalize_to_surface,
    surface_membership,
)
from .operators import (
    DensityMatrix,
    HermitianOperator,
    SpaceDescriptor,
    Spectrum,
    density_matrix,
    eigh,
    hs_inner,
    is_full_range,
    partial_transpose,
    read_operator,
    tensor_product,
    validate_hermitian,
    write_operator,
)
from .solver import (
    SeparabilityVerdict,
    SolverReport,
    classify_robust_separability,
    ppt_check,
    solve_bipartite_saa,
    solve_single,
    werner_state,
)

__version__ = "0.1.0"
