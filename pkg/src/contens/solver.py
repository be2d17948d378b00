"""Inverse problem: find the Hermitian ``X`` with ``grad K(X) = rho``.

``X`` minimizes the convex objective ``J(X) = K(X) - trace(X rho)``.  For a
single system ``X`` commutes with ``rho`` and the problem reduces to Newton's
method on the eigenvalues with the closed-form ``K``.  For bipartite systems
``K`` is replaced by its sample average over a fixed, seeded set of product
states; the resulting finite-dimensional problem is solved by damped Newton.
When ``rho`` lies outside the cone spanned by the sampled product projectors
the empirical objective is unbounded below and the iterates run off to
infinity, which is reported as divergence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import linprog

from . import divdiff
from .errors import MaxIterations, NotBipartite, NotFullRange, NotSingleSystem
from .kfunc import EvalConfig, SampleSet, k_closed_single
from .operators import (
    DensityMatrix,
    HermitianOperator,
    SpaceDescriptor,
    as_density,
    as_operator,
    density_matrix,
    eigh,
    from_real_coords,
    is_full_range,
    operator_to_dict,
    partial_transpose,
    to_real_coords,
)

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
# slack for objective differences below rounding near the optimum
ROUNDING_SLACK = 1e-14


def _armijo_ok(jt: float, j: float, t: float, slope: float) -> bool:
    return bool(np.isfinite(jt)) and jt <= j + ARMIJO_C * t * slope + ROUNDING_SLACK * abs(j)
PPT_TOL = 1e-10
RECESSION_TOL = 1e-9
PPT_EXACT_DIMS = {(2, 2), (2, 3), (3, 2)}


@dataclass(frozen=True, eq=False)
class SolverReport:
    status: Literal["converged", "diverging", "inconclusive"]
    x: HermitianOperator | None = None
    k_value: float | None = None
    grad_residual: float | None = None
    iterations: int = 0
    objective: float | None = None
    norm_trace: list[float] = field(default_factory=list)
    certificate: HermitianOperator | None = None
    reason: str | None = None
    seed: int | None = None
    samples: int | None = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "x": operator_to_dict(self.x) if self.x is not None else None,
            "k": self.k_value,
            "grad_residual": self.grad_residual,
            "iterations": self.iterations,
            "objective": self.objective,
            "norm_trace": list(self.norm_trace),
            "certificate": (operator_to_dict(self.certificate)
                            if self.certificate is not None else None),
            "reason": self.reason,
            "seed": self.seed,
            "samples": self.samples,
        }


# -- single system -----------------------------------------------------------

def _newton_spectrum(p: np.ndarray, max_iter: int):
    n = len(p)
    lam = np.zeros(n)

    def objective(v):
        return divdiff.spectral_k(v) - p @ v

    j = objective(lam)
    best = math.inf
    for it in range(1, max_iter + 1):
        g = divdiff.spectral_k_grad(lam) - p
        gn = float(np.linalg.norm(g))
        # stop once the residual has hit rounding level and stopped improving
        if gn < 1e-15 or (gn >= best and gn < 1e-12):
            return lam, it - 1
        best = min(best, gn)
        h = divdiff.spectral_k_hess(lam)
        step = np.linalg.solve(h, -g)
        slope = g @ step
        if slope >= 0:
            step, slope = -g, -(g @ g)
        t = 1.0
        while True:
            trial = lam + t * step
            jt = objective(trial)
            if _armijo_ok(jt, j, t, slope) or t < 1e-12:
                break
            t *= ARMIJO_SHRINK
        if t < 1e-12:
            return lam, it
        lam, j = trial, jt
    return lam, max_iter


def solve_single(rho, cfg: EvalConfig | None = None, max_iter: int = 200,
                 grad_tol: float = 1e-8) -> SolverReport:
    """Exact inverse for a full-range single-system density matrix.

    Raises NotFullRange for rank-deficient input and MaxIterations when the
    gradient residual does not reach ``grad_tol``.
    """
    rho = as_density(rho)
    if rho.space.is_bipartite:
        raise NotSingleSystem("use solve_bipartite_saa for bipartite states")
    if not is_full_range(rho, 1e-8):
        raise NotFullRange("density matrix has an eigenvalue below 1e-8")
    spec = eigh(rho.op)
    lam, iters = _newton_spectrum(np.array(spec.eigenvalues), max_iter)
    u = spec.eigenvectors
    xm = (u * lam) @ u.conj().T
    x = HermitianOperator(rho.space, (xm + xm.conj().T) / 2)
    ev = k_closed_single(x)
    resid = float(np.linalg.norm(ev.gradient.entries - rho.entries))
    if resid > grad_tol:
        raise MaxIterations(
            f"residual {resid:.3g} above {grad_tol:g} after {iters} Newton steps"
        )
    return SolverReport(
        "converged", x=x, k_value=ev.k_value, grad_residual=resid, iterations=iters,
        objective=ev.k_value - float(np.sum(x.entries * rho.entries.T).real),
        norm_trace=[x.frobenius()],
    )


# -- bipartite sample average approximation ---------------------------------

def projector_features(states: np.ndarray) -> np.ndarray:
    """Real coordinates of ``|psi><psi|`` for each row, so ``<psi|X|psi> = f @ x``."""
    d = states.shape[1]
    iu, ju = np.triu_indices(d, 1)
    off = states[:, iu] * states[:, ju].conj()
    return np.concatenate(
        [np.abs(states) ** 2, math.sqrt(2) * off.real, -math.sqrt(2) * off.imag], axis=1
    )


class EmpiricalObjective:
    """``J(x) = mean_i exp(f_i @ x) - b @ x`` on a fixed sample set."""

    def __init__(self, target: DensityMatrix, samples: SampleSet):
        self.features = projector_features(samples.states)
        self.b = to_real_coords(target.entries)
        self.n = samples.samples

    def value(self, x: np.ndarray) -> float:
        with np.errstate(over="ignore"):
            return float(np.mean(np.exp(self.features @ x)) - self.b @ x)

    def derivatives(self, x: np.ndarray):
        f = self.features
        with np.errstate(over="ignore"):
            w = np.exp(f @ x)
        k = float(w.mean())
        grad = f.T @ w / self.n - self.b
        hess = (f * w[:, None]).T @ f / self.n
        return k - self.b @ x, k, grad, hess


def _descent_step(grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    try:
        step = np.linalg.solve(hess, -grad)
    except np.linalg.LinAlgError:
        step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
    if not np.all(np.isfinite(step)) or grad @ step >= 0:
        step = -grad
    return step


def _decreasing_along(obj: EmpiricalObjective, x: np.ndarray, v: np.ndarray,
                      j: float, scale: float) -> bool:
    prev = j
    for s in (1.0, 2.0, 4.0, 8.0):
        jt = obj.value(x + s * scale * v)
        if not np.isfinite(jt) or jt >= prev:
            return False
        prev = jt
    return True


def recession_direction(obj: EmpiricalObjective) -> np.ndarray | None:
    """Unit direction ``v`` with ``f_i @ v <= 0`` for all samples and ``b @ v > 0``.

    Along such a direction every exponential term is non-increasing while the
    linear term falls without bound, so J is unbounded below.  Returns None
    when no such direction exists (the target lies in the closed sample cone).
    """
    res = linprog(-obj.b, A_ub=obj.features, b_ub=np.zeros(len(obj.features)),
                  bounds=(-1.0, 1.0), method="highs")
    if res.status != 0 or -res.fun <= RECESSION_TOL:
        return None
    return res.x / np.linalg.norm(res.x)


def solve_bipartite_saa(rho, cfg: EvalConfig | None = None, max_iter: int = 200,
                        grad_tol: float = 1e-6, norm_cap: float = 50.0,
                        x0=None) -> SolverReport:
    """Minimize the sample-average objective for a bipartite density matrix.

    Starts at ``x0`` (default ``X = 0``).  Iterations continue past ``grad_tol`` until the
    residual stops improving, so on consistent data the empirical optimum is
    found to rounding level.  Once ``|X|`` exceeds ``norm_cap`` the solver
    looks for a fixed direction along which J decreases without bound (see
    :func:`recession_direction`); finding one is reported as divergence.
    Otherwise iteration continues, and running out of iterations is
    reported as inconclusive.
    """
    cfg = cfg or EvalConfig()
    rho = as_density(rho)
    if not rho.space.is_bipartite:
        raise NotBipartite("solve_bipartite_saa needs a bipartite density matrix")
    d = rho.dim
    samples = SampleSet.for_config(rho.space, cfg)
    obj = EmpiricalObjective(rho, samples)
    x = np.zeros(d * d) if x0 is None else to_real_coords(as_operator(x0).entries)
    norms = []
    meta = dict(seed=cfg.seed, samples=cfg.samples)
    best = math.inf
    cone_checked = False
    j, k, grad, hess = obj.derivatives(x)
    for it in range(1, max_iter + 1):
        gn = float(np.linalg.norm(grad))
        if gn <= grad_tol and (gn < 1e-14 or gn >= 0.5 * best):
            return _converged(rho, x, k, gn, it - 1, j, norms, meta)
        best = min(best, gn)
        step = _descent_step(grad, hess)
        slope = float(grad @ step)
        t = 1.0
        while True:
            trial = x + t * step
            jt = obj.value(trial)
            if _armijo_ok(jt, j, t, slope):
                break
            t *= ARMIJO_SHRINK
            if t < 1e-14:
                break
        if t < 1e-14:
            if gn <= grad_tol:
                return _converged(rho, x, k, gn, it - 1, j, norms, meta)
            return SolverReport("inconclusive", iterations=it, objective=j, norm_trace=norms,
                                grad_residual=gn, reason="line search stalled", **meta)
        x = trial
        norms.append(float(np.linalg.norm(x)))
        j, k, grad, hess = obj.derivatives(x)
        if norms[-1] > norm_cap and not cone_checked:
            cone_checked = True
            direction = recession_direction(obj)
            if direction is not None and _decreasing_along(obj, x, direction, j, norm_cap):
                log.debug("diverging after %d iterations, |X| = %.3g", it, norms[-1])
                return SolverReport(
                    "diverging", iterations=it, objective=j, norm_trace=norms,
                    grad_residual=float(np.linalg.norm(grad)),
                    certificate=HermitianOperator(rho.space, from_real_coords(direction, d)),
                    reason=f"|X| exceeded {norm_cap:g} with J decreasing along a fixed direction",
                    **meta,
                )
    return SolverReport("inconclusive", iterations=max_iter, objective=j, norm_trace=norms,
                        grad_residual=float(np.linalg.norm(grad)),
                        reason="maximum iterations reached", **meta)


def _converged(rho, x, k, gn, iters, j, norms, meta) -> SolverReport:
    xop = HermitianOperator(rho.space, from_real_coords(x, rho.dim))
    return SolverReport("converged", x=xop, k_value=k, grad_residual=gn, iterations=iters,
                        objective=j, norm_trace=norms or [0.0], **meta)


# -- separability ------------------------------------------------------------

def ppt_check(rho) -> float:
    """Smallest eigenvalue of the partial transpose on the second factor."""
    pt = partial_transpose(rho, "second")
    return float(np.linalg.eigvalsh(pt.entries)[0])


@dataclass(frozen=True, eq=False)
class SeparabilityVerdict:
    verdict: Literal["robustly_separable", "not_robustly_separable", "inconclusive"]
    ppt_min_eigenvalue: float
    evidence: Literal["ppt_negative", "solver_divergence"] | None = None
    x: HermitianOperator | None = None
    margin: float | None = None
    label: str | None = None
    report: SolverReport | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "evidence": self.evidence,
            "ppt_min_eigenvalue": self.ppt_min_eigenvalue,
            "x": operator_to_dict(self.x) if self.x is not None else None,
            "margin": self.margin,
            "label": self.label,
            "solver": self.report.to_dict() if self.report is not None else None,
        }

    @property
    def solver_norm_final(self) -> float | None:
        if self.report is None or not self.report.norm_trace:
            return None
        return self.report.norm_trace[-1]


def classify_robust_separability(rho, cfg: EvalConfig | None = None,
                                 **solver_kw) -> SeparabilityVerdict:
    """Decide robust separability of a bipartite state.

    A negative partial transpose settles the question at once.  Otherwise the
    state is robustly separable when the sample-average problem has a
    minimizer (it then lies in the interior of the cone of sampled product
    states), and not robustly separable when it diverges.  In 2x2 and 2x3 a
    positive partial transpose already proves separability, so divergence
    there is reported as inconclusive rather than contradicting it.
    """
    rho = as_density(rho)
    if not rho.space.is_bipartite:
        raise NotBipartite("classification needs a bipartite density matrix")
    ppt_min = ppt_check(rho)
    if ppt_min < -PPT_TOL:
        return SeparabilityVerdict("not_robustly_separable", ppt_min, evidence="ppt_negative",
                                   label="entangled by negative partial transpose")
    exact = rho.space.dims in PPT_EXACT_DIMS
    label = "separable by PPT (exact in this dimension)" if exact else None
    report = solve_bipartite_saa(rho, cfg, **solver_kw)
    if report.status == "converged":
        x = report.x.shift(-math.log(report.k_value))
        return SeparabilityVerdict("robustly_separable", ppt_min, x=x, label=label,
                                   report=report)
    if report.status == "diverging" and not exact:
        return SeparabilityVerdict("not_robustly_separable", ppt_min,
                                   evidence="solver_divergence", report=report)
    return SeparabilityVerdict("inconclusive", ppt_min, margin=ppt_min, label=label,
                               report=report)


def werner_state(p: float) -> DensityMatrix:
    """``p |psi-><psi-| + (1 - p) I/4`` on two qubits."""
    psi = np.array([0, 1, -1, 0]) / math.sqrt(2)
    m = p * np.outer(psi, psi) + (1 - p) * np.eye(4) / 4
    return density_matrix(m, SpaceDescriptor.bipartite(2, 2))
