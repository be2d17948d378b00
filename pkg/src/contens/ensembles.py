"""Continuous ensembles: densities on the unit sphere and their barycenters.

A continuous ensemble is a probability density ``mu`` with respect to the
normalized invariant measure; its barycenter ``E[mu(phi) |phi><phi|]`` is the
density matrix it represents.  Three families are supported:

* ``exponential``: ``mu(phi) = exp(<phi|X|phi>)`` (maximum entropy form),
* ``smeared``: ``mu(phi) = sum_k w_k |<e_k|phi>|^(2M)`` (single systems only),
* ``empirical``: a finite weighted mixture of pure states.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import (
    BoundViolation,
    DimensionMismatch,
    NotFullRange,
    SchemaViolation,
    UnsupportedFamily,
)
from .haar import dirichlet_moment, state_block
from .kfunc import CHUNK, EvalConfig, KEvaluation, k_mc
from .operators import (
    HermitianOperator,
    SpaceDescriptor,
    as_density,
    as_operator,
    eigh,
    hs_inner,
    load_json,
    operator_from_dict,
    operator_to_dict,
)

Family = Literal["exponential", "smeared", "empirical"]


@dataclass(frozen=True, eq=False)
class ContinuousEnsemble:
    space: SpaceDescriptor
    family: Family
    x: HermitianOperator | None = None
    basis: np.ndarray | None = None       # columns are the vectors e_k
    weights: np.ndarray | None = None
    exponent: int | None = None
    states: np.ndarray | None = None      # rows are pure states (empirical)
    check_residual: float | None = None

    def __post_init__(self):
        d = self.space.total_dim
        if self.family == "exponential":
            if self.x is None or self.x.space != self.space:
                raise DimensionMismatch("exponential family needs X on the same space")
        elif self.family == "smeared":
            if self.space.is_bipartite:
                raise UnsupportedFamily("smeared ensembles are defined on a single sphere")
            w = np.asarray(self.weights, dtype=float)
            if self.basis is None or np.shape(self.basis) != (d, len(w)):
                raise DimensionMismatch("basis must be a d x K matrix matching the weights")
            if np.any(w < 0):
                raise SchemaViolation("smeared weights must be non-negative")
            if self.exponent is None or int(self.exponent) < 1:
                raise SchemaViolation("smeared exponent must be a positive integer")
            object.__setattr__(self, "weights", w)
        elif self.family == "empirical":
            s = np.asarray(self.states, dtype=complex)
            w = np.asarray(self.weights, dtype=float)
            if s.ndim != 2 or s.shape[1] != d or len(w) != len(s):
                raise DimensionMismatch("empirical states must be N x d with N weights")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise SchemaViolation("empirical weights must be non-negative and sum to 1")
            object.__setattr__(self, "states", s)
            object.__setattr__(self, "weights", w)
        else:
            raise UnsupportedFamily(f"unknown family {self.family!r}")

    @classmethod
    def exponential(cls, X) -> "ContinuousEnsemble":
        x = as_operator(X)
        return cls(x.space, "exponential", x=x)

    @classmethod
    def empirical(cls, space: SpaceDescriptor, states, weights) -> "ContinuousEnsemble":
        """Finite mixture; bipartite states may be given as ``(phi, phi2)`` pairs."""
        rows = []
        for s in states:
            if isinstance(s, tuple):
                s = np.kron(s[0], s[1])
            rows.append(np.asarray(s, dtype=complex))
        return cls(space, "empirical", states=np.array(rows), weights=weights)


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    mean: HermitianOperator
    std_error: float
    samples_used: int
    seed: int | None


def _flat_state(space: SpaceDescriptor, phi) -> np.ndarray:
    if isinstance(phi, tuple):
        phi = np.kron(np.asarray(phi[0]), np.asarray(phi[1]))
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (space.total_dim,):
        raise DimensionMismatch(f"state of shape {phi.shape} for dims {space.dims}")
    if abs(np.linalg.norm(phi) - 1.0) > 1e-12:
        raise ValueError("state must be normalized to within 1e-12")
    return phi


def _smeared_density(e: ContinuousEnsemble, psi: np.ndarray) -> np.ndarray:
    t = np.abs(psi @ e.basis.conj()) ** 2
    return (t ** e.exponent) @ e.weights


def density_at(e: ContinuousEnsemble, phi) -> float:
    """Value of ``mu`` at a unit vector (or a ``(phi, phi2)`` pair)."""
    psi = _flat_state(e.space, phi)
    if e.family == "exponential":
        return math.exp(float(np.vdot(psi, e.x.entries @ psi).real))
    if e.family == "smeared":
        return float(_smeared_density(e, psi[None, :])[0])
    raise UnsupportedFamily("an empirical ensemble has no density on the sphere")


def _smeared_barycenter(e: ContinuousEnsemble) -> np.ndarray:
    n = e.space.total_dim
    m = e.exponent
    w = e.weights
    same = dirichlet_moment(n, [m + 1])
    cross = dirichlet_moment(n, [m, 1]) if n > 1 else 0.0
    diag = w * same + (w.sum() - w) * cross
    u = e.basis
    out = (u * diag) @ u.conj().T
    return (out + out.conj().T) / 2


def barycenter(e: ContinuousEnsemble, cfg: EvalConfig | None = None) -> BarycenterResult:
    """Density matrix ``E[mu(phi) |phi><phi|]`` represented by an ensemble.

    Exponential ensembles are integrated by Monte Carlo (the same estimator,
    on the same samples, as the gradient in :func:`contens.kfunc.k_mc`);
    smeared ensembles exactly from the sphere moments; empirical ones as a
    weighted sum of projectors.
    """
    if e.family == "exponential":
        ev = k_mc(e.x, cfg or EvalConfig())
        return BarycenterResult(ev.gradient, ev.gradient_std_error, ev.samples, ev.seed)
    if e.family == "smeared":
        return BarycenterResult(HermitianOperator(e.space, _smeared_barycenter(e)), 0.0, 0, None)
    s = e.states
    mean = (s * e.weights[:, None]).T @ s.conj()
    return BarycenterResult(
        HermitianOperator(e.space, (mean + mean.conj().T) / 2), 0.0, len(s), None
    )


def smeared_constants(n: int, L: int) -> tuple[float, float]:
    """Prefactor ``((L+1)n)! / (L n! (Ln)!)`` and offset ``1/(n(L+1))``."""
    a = Fraction(math.factorial((L + 1) * n), L * math.factorial(n) * math.factorial(L * n))
    return float(a), 1.0 / (n * (L + 1))


def min_admissible_L(n: int, p0: float) -> int:
    """Smallest positive integer ``L`` with ``p0 > 1/(n(L+1))``."""
    L = max(1, math.floor(1.0 / (n * p0) - 1.0) + 1)
    while not p0 > 1.0 / (n * (L + 1)):
        L += 1
    while L > 1 and p0 > 1.0 / (n * L):
        L -= 1
    return L


def _alt_min_L(n: int, p0: float) -> int:
    # smallest integer L > 1/(p0 (n+1))
    L = max(1, math.floor(1.0 / (p0 * (n + 1))) + 1)
    while not L > 1.0 / (p0 * (n + 1)):
        L += 1
    return L


def smeared_from_density(rho, L: int) -> ContinuousEnsemble:
    """Strictly positive polynomial ensemble whose barycenter is ``rho``.

    In the eigenbasis ``rho = sum_k p_k |e_k><e_k|`` the density is
    ``A sum_k (p_k - 1/(n(L+1))) |<e_k|phi>|^(2Ln)``.  All weights are
    non-negative only when the smallest eigenvalue exceeds ``1/(n(L+1))``;
    otherwise BoundViolation reports the smallest admissible ``L``.
    """
    rho = as_density(rho)
    if rho.space.is_bipartite:
        raise UnsupportedFamily("smeared ensembles are defined for single systems")
    if int(L) != L or L < 1:
        raise ValueError("L must be a positive integer")
    L = int(L)
    n = rho.dim
    spec = eigh(rho.op)
    p = spec.eigenvalues
    p0 = float(p[0])
    if p0 <= 0:
        raise NotFullRange(f"smallest eigenvalue {p0:.3g} is not positive")
    a, c = smeared_constants(n, L)
    if n > 1 and np.any(p <= c):
        min_L = min_admissible_L(n, p0)
        raise BoundViolation(
            f"smallest eigenvalue {p0:.6g} <= 1/(n(L+1)) = {c:.6g} for L={L}; "
            f"minimal admissible L is {min_L} "
            f"(the condition L > 1/(p0(n+1)) would give {_alt_min_L(n, p0)})",
            min_L=min_L, alt_min_L=_alt_min_L(n, p0), p0=p0,
        )
    weights = a * (p - c)
    e = ContinuousEnsemble(
        rho.space, "smeared", basis=np.array(spec.eigenvectors),
        weights=weights, exponent=L * n,
    )
    resid = float(np.max(np.abs(_smeared_barycenter(e) - rho.entries)))
    object.__setattr__(e, "check_residual", resid)
    return e


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    std_error: float
    samples: int
    seed: int | None
    analytic: float | None = None


def differential_entropy(e: ContinuousEnsemble, cfg: EvalConfig | None = None,
                         kev: KEvaluation | None = None) -> EntropyEstimate:
    """Monte Carlo estimate of ``-E[mu ln mu]`` under the invariant measure.

    For exponential ensembles ``-E[mu ln mu] = -trace(X grad K(X))``; when a
    KEvaluation is supplied that value is returned as ``analytic``.
    """
    cfg = cfg or EvalConfig()
    if e.family == "exponential":
        ev = k_mc(e.x, cfg)
        analytic = None
        if kev is not None:
            analytic = -hs_inner(e.x, kev.gradient)
        return EntropyEstimate(-ev.wg_mean, ev.wg_std_error, ev.samples, ev.seed, analytic)
    if e.family != "smeared":
        raise UnsupportedFamily("entropy is undefined for empirical ensembles")
    s1 = s2 = 0.0
    n = cfg.samples
    for lo in range(0, n, CHUNK):
        psi = state_block(e.space.dims, cfg.seed, lo, min(lo + CHUNK, n))
        mu = _smeared_density(e, psi)
        v = -mu * np.log(np.where(mu > 0, mu, 1.0))
        s1 += v.sum()
        s2 += (v * v).sum()
    var = max(s2 - s1 * s1 / n, 0.0) / max(n - 1, 1)
    return EntropyEstimate(s1 / n, math.sqrt(var / n), n, cfg.seed)


# -- serialization ----------------------------------------------------------

def _cmat(obj, name):
    try:
        return np.array(obj[name]["re"], dtype=float) + 1j * np.array(obj[name]["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation(f"bad or missing {name!r}: {exc}") from exc


def ensemble_to_dict(e: ContinuousEnsemble) -> dict:
    out = {"family": e.family, "dims": list(e.space.dims)}
    if e.family == "exponential":
        out["operator"] = operator_to_dict(e.x)
    elif e.family == "smeared":
        out["basis"] = {"re": e.basis.real.tolist(), "im": e.basis.imag.tolist()}
        out["weights"] = e.weights.tolist()
        out["exponent"] = int(e.exponent)
    else:
        out["samples"] = [
            {"re": s.real.tolist(), "im": s.imag.tolist(), "weight": float(w)}
            for s, w in zip(e.states, e.weights)
        ]
    return out


def ensemble_from_dict(obj, base_dir: str | os.PathLike = ".") -> ContinuousEnsemble:
    if not isinstance(obj, dict) or "family" not in obj:
        raise SchemaViolation("ensemble must be an object with a 'family' field")
    fam = obj["family"]
    if fam == "exponential":
        if "operator" in obj:
            x = operator_from_dict(obj["operator"])
        elif "operator_file" in obj:
            x = operator_from_dict(load_json(os.path.join(base_dir, obj["operator_file"])))
        else:
            raise SchemaViolation("exponential ensemble needs 'operator' or 'operator_file'")
        return ContinuousEnsemble.exponential(x)
    if "dims" not in obj:
        raise SchemaViolation("ensemble is missing 'dims'")
    space = SpaceDescriptor(tuple(obj["dims"]))
    if fam == "smeared":
        try:
            return ContinuousEnsemble(
                space, "smeared", basis=_cmat(obj, "basis"),
                weights=np.array(obj["weights"], dtype=float),
                exponent=int(obj["exponent"]),
            )
        except KeyError as exc:
            raise SchemaViolation(f"smeared ensemble is missing {exc}") from exc
    if fam == "empirical":
        try:
            rows = obj["samples"]
            states = [np.array(r["re"], dtype=float) + 1j * np.array(r["im"], dtype=float)
                      for r in rows]
            weights = [float(r["weight"]) for r in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"bad empirical samples: {exc}") from exc
        return ContinuousEnsemble.empirical(space, states, weights)
    raise UnsupportedFamily(f"unknown family {fam!r}")


def write_ensemble(e: ContinuousEnsemble, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(ensemble_to_dict(e), fh, allow_nan=False)
        fh.write("\n")


def read_ensemble(path) -> ContinuousEnsemble:
    return ensemble_from_dict(load_json(path), os.path.dirname(os.fspath(path)) or ".")
