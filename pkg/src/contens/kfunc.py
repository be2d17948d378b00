"""The exponential functional ``K(X) = E_phi[exp(<phi|X|phi>)]`` and its gradient.

The expectation is over the normalized unitary-invariant measure on the unit
sphere (single system) or on the product of two spheres (bipartite).  The
gradient with respect to the trace inner product is

    grad K(X) = E_phi[exp(<phi|X|phi>) |phi><phi|],

a positive operator whose trace equals ``K(X)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import divdiff
from .errors import BudgetExceeded, NotSingleSystem, ToleranceBelowNoise
from .haar import state_block
from .operators import (
    HermitianOperator,
    SpaceDescriptor,
    as_operator,
    eigh,
    hermitian_basis,
    operator_to_dict,
)

CHUNK = 8192


@dataclass(frozen=True)
class EvalConfig:
    samples: int = 100_000
    seed: int = 0
    max_samples: int = 100_000_000
    tolerance: float | None = None
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.samples > self.max_samples:
            raise BudgetExceeded(
                f"samples={self.samples} exceeds max_samples={self.max_samples}"
            )


@dataclass(frozen=True, eq=False)
class KEvaluation:
    x: HermitianOperator
    k_value: float
    k_std_error: float
    gradient: HermitianOperator
    gradient_std_error: float
    method: Literal["closed_form", "monte_carlo"]
    samples: int = 0
    seed: int | None = None
    # per-entry standard errors of the gradient (zeros for the closed form)
    gradient_entry_std_error: np.ndarray | None = field(default=None, repr=False)
    # Monte Carlo estimate of E[w g] and its error, with w = exp(g)
    wg_mean: float | None = None
    wg_std_error: float | None = None

    def to_dict(self) -> dict:
        return {
            "k": self.k_value,
            "k_stderr": self.k_std_error,
            "grad": operator_to_dict(self.gradient),
            "grad_stderr": self.gradient_std_error,
            "method": self.method,
            "seed": self.seed,
            "samples": self.samples,
        }


# -- closed form (single system) --------------------------------------------

def k_closed_single(X) -> KEvaluation:
    """Exact ``K`` and ``grad K`` for a single system via divided differences of exp."""
    x = as_operator(X)
    if x.space.is_bipartite:
        raise NotSingleSystem("closed form is only available for single systems")
    spec = eigh(x)
    lam = spec.eigenvalues
    u = spec.eigenvectors
    k = divdiff.spectral_k(lam)
    dk = divdiff.spectral_k_grad(lam)
    grad = (u * dk) @ u.conj().T
    grad = HermitianOperator(x.space, (grad + grad.conj().T) / 2)
    d = x.dim
    return KEvaluation(
        x, k, 0.0, grad, 0.0, "closed_form",
        gradient_entry_std_error=np.zeros((d, d)),
    )


# -- Monte Carlo --------------------------------------------------------------

class SampleSet:
    """A frozen block of Haar (or product-Haar) sample vectors.

    Reusing one SampleSet across evaluations gives common random numbers:
    identities that hold per sample then hold exactly for the estimates.
    """

    def __init__(self, dims, seed: int, samples: int):
        self.dims = tuple(dims)
        self.seed = seed
        self.samples = samples
        self.states = state_block(self.dims, seed, 0, samples)
        self.states.flags.writeable = False

    @classmethod
    def for_config(cls, space: SpaceDescriptor, cfg: EvalConfig) -> "SampleSet":
        return cls(space.dims, cfg.seed, cfg.samples)

    def chunks(self):
        for lo in range(0, self.samples, CHUNK):
            yield self.states[lo:lo + CHUNK]


def _chunk_sums(x: np.ndarray, psi: np.ndarray):
    xpsi = psi @ x.T
    g = np.einsum("ni,ni->n", psi.conj(), xpsi).real
    w = np.exp(g)
    a2 = psi.real ** 2 + psi.imag ** 2
    w2 = w * w
    wg = w * g
    return (
        w.sum(),
        w2.sum(),
        (psi * w[:, None]).T @ psi.conj(),
        (a2 * w2[:, None]).T @ a2,
        wg.sum(),
        (wg * wg).sum(),
    )


def _reduce(parts):
    total = list(parts[0])
    for p in parts[1:]:
        for i, v in enumerate(p):
            total[i] = total[i] + v
    return total


def _stderr(s1, s2, n):
    if n < 2:
        return np.zeros_like(np.asarray(s1, dtype=float))
    var = (s2 - np.abs(s1) ** 2 / n) / (n - 1)
    return np.sqrt(np.clip(var, 0.0, None) / n)


def _evaluation(x: HermitianOperator, sums, n: int, seed: int) -> KEvaluation:
    sw, sw2, gs, g2, swg, swg2 = sums
    grad = gs / n
    grad = (grad + grad.conj().T) / 2
    gerr = _stderr(gs, g2, n)
    return KEvaluation(
        x,
        float(sw / n),
        float(_stderr(sw, sw2, n)),
        HermitianOperator(x.space, grad),
        float(np.linalg.norm(gerr)),
        "monte_carlo",
        samples=n,
        seed=seed,
        gradient_entry_std_error=gerr,
        wg_mean=float(swg / n),
        wg_std_error=float(_stderr(swg, swg2, n)),
    )


def k_on_samples(X, sample_set: SampleSet) -> KEvaluation:
    """Monte Carlo K and grad K on a fixed sample set."""
    x = as_operator(X)
    if x.space.dims != sample_set.dims:
        raise ValueError(f"operator dims {x.space.dims} vs samples {sample_set.dims}")
    parts = [_chunk_sums(x.entries, psi) for psi in sample_set.chunks()]
    return _evaluation(x, _reduce(parts), sample_set.samples, sample_set.seed)


def _k_streamed(x: HermitianOperator, n: int, seed: int, workers: int) -> KEvaluation:
    dims = x.space.dims
    bounds = [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]

    def work(b):
        return _chunk_sums(x.entries, state_block(dims, seed, *b))

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    return _evaluation(x, _reduce(parts), n, seed)


def k_mc(X, cfg: EvalConfig | None = None) -> KEvaluation:
    """Monte Carlo K and grad K with ``cfg.samples`` draws.

    With ``cfg.tolerance`` set, the sample count doubles until the standard
    error of K drops below it; exceeding ``cfg.max_samples`` raises
    BudgetExceeded.  Chunk boundaries are fixed, so the result does not
    depend on ``cfg.workers``.
    """
    cfg = cfg or EvalConfig()
    x = as_operator(X)
    n = cfg.samples
    while True:
        ev = _k_streamed(x, n, cfg.seed, cfg.workers)
        if cfg.tolerance is None or ev.k_std_error <= cfg.tolerance:
            return ev
        if 2 * n > cfg.max_samples:
            raise BudgetExceeded(
                f"stderr {ev.k_std_error:.3g} > tolerance {cfg.tolerance:g} "
                f"at {n} samples; doubling would exceed max_samples={cfg.max_samples}"
            )
        n *= 2


def k_eval(X, cfg: EvalConfig | None = None, closed_form: bool | None = None) -> KEvaluation:
    """Best available evaluation: closed form for single systems unless told otherwise."""
    x = as_operator(X)
    if closed_form is None:
        closed_form = not x.space.is_bipartite
    if closed_form:
        return k_closed_single(x)
    return k_mc(x, cfg)


# -- checks and the surface K = 1 --------------------------------------------

def grad_fd_check(X, h: float = 1e-5, cfg: EvalConfig | None = None,
                  closed_form: bool | None = None) -> float:
    """Max relative deviation between grad K and central finite differences.

    Differences are taken along an orthonormal basis of Hermitian matrices.
    The Monte Carlo path evaluates every perturbed point on one sample set.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-6, 1e-3]")
    x = as_operator(X)
    if closed_form is None:
        closed_form = not x.space.is_bipartite
    if closed_form:
        def evaluate(op):
            return k_closed_single(op)
    else:
        samples = SampleSet.for_config(x.space, cfg or EvalConfig())

        def evaluate(op):
            return k_on_samples(op, samples)

    grad = evaluate(x).gradient.entries
    analytic, numeric = [], []
    for b in hermitian_basis(x.dim):
        bop = HermitianOperator(x.space, b)
        kp = evaluate(x + bop * h).k_value
        km = evaluate(x - bop * h).k_value
        numeric.append((kp - km) / (2 * h))
        analytic.append(float(np.sum(grad * b.T).real))
    analytic = np.array(analytic)
    numeric = np.array(numeric)
    return float(np.max(np.abs(numeric - analytic)) / np.max(np.abs(analytic)))


def normalize_to_surface(X, cfg: EvalConfig | None = None,
                         closed_form: bool | None = None) -> HermitianOperator:
    """Shift ``X`` by a multiple of the identity so that ``K(X) = 1``.

    Uses ``K(X + c I) = e^c K(X)``.
    """
    x = as_operator(X)
    ev = k_eval(x, cfg, closed_form)
    return x.shift(-math.log(ev.k_value))


@dataclass(frozen=True)
class SurfaceMembership:
    inside: bool
    k_value: float
    k_std_error: float

    @property
    def label(self) -> str:
        return "InSurface" if self.inside else "OffSurface"


def surface_membership(X, cfg: EvalConfig | None = None, tol: float = 1e-9,
                       closed_form: bool | None = None) -> SurfaceMembership:
    ev = k_eval(X, cfg, closed_form)
    if tol <= max(3 * ev.k_std_error, 1e-12):
        raise ToleranceBelowNoise(
            f"tol={tol:g} is not above max(3*stderr, 1e-12) = "
            f"{max(3 * ev.k_std_error, 1e-12):.3g}"
        )
    return SurfaceMembership(abs(ev.k_value - 1.0) <= tol, ev.k_value, ev.k_std_error)


def with_samples(cfg: EvalConfig, samples: int) -> EvalConfig:
    return replace(cfg, samples=samples)
