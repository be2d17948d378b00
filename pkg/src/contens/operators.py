"""Hermitian operators on single and bipartite finite-dimensional spaces.

Bipartite index convention is row-major with the first factor major:
the basis vector ``|i>|i'>`` has flat index ``i * n2 + i'``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotBipartite,
    NotDensityMatrix,
    NotHermitian,
    ParseError,
    SchemaViolation,
)

HERMITIAN_TOL = 1e-8
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
MAX_TOTAL_DIM = 64


@dataclass(frozen=True)
class SpaceDescriptor:
    """Shape of the Hilbert space an operator acts on."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (1, 2):
            raise DimensionMismatch(f"expected one or two factor dims, got {dims}")
        if any(d < 1 for d in dims):
            raise DimensionMismatch(f"dims must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def single(cls, n: int) -> "SpaceDescriptor":
        return cls((n,))

    @classmethod
    def bipartite(cls, n1: int, n2: int) -> "SpaceDescriptor":
        return cls((n1, n2))

    @property
    def kind(self) -> Literal["single", "bipartite"]:
        return "single" if len(self.dims) == 1 else "bipartite"

    @property
    def is_bipartite(self) -> bool:
        return len(self.dims) == 2

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Immutable self-adjoint matrix tagged with its space.

    ``correction`` is the max asymmetry removed by symmetrization when the
    operator came through :func:`validate_hermitian`.
    """

    space: SpaceDescriptor
    entries: np.ndarray
    correction: float = 0.0

    def __post_init__(self):
        d = self.space.total_dim
        if self.entries.shape != (d, d):
            raise DimensionMismatch(
                f"matrix shape {self.entries.shape} does not match total_dim {d}"
            )
        object.__setattr__(self, "entries", _readonly(self.entries))

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))

    def shift(self, c: float) -> "HermitianOperator":
        """Return ``self + c * I``."""
        return HermitianOperator(self.space, self.entries + c * np.eye(self.dim))

    def _check_same(self, other: "HermitianOperator"):
        if self.space != other.space:
            raise DimensionMismatch(f"{self.space.dims} vs {other.space.dims}")

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same(other)
        return HermitianOperator(self.space, self.entries + other.entries)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check_same(other)
        return HermitianOperator(self.space, self.entries - other.entries)

    def __mul__(self, c: float) -> "HermitianOperator":
        return HermitianOperator(self.space, float(c) * self.entries)

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(self.space, -self.entries)

    def __repr__(self):
        return f"HermitianOperator(dims={self.space.dims}, entries=\n{self.entries})"


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one positive semidefinite operator."""

    op: HermitianOperator
    correction: float = 0.0

    @property
    def space(self) -> SpaceDescriptor:
        return self.op.space

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _space_for(raw: np.ndarray, space: SpaceDescriptor | None) -> SpaceDescriptor:
    if space is None:
        return SpaceDescriptor.single(raw.shape[0])
    return space


def validate_hermitian(raw, space: SpaceDescriptor | None = None) -> HermitianOperator:
    """Check ``raw`` is Hermitian to within 1e-8 and symmetrize it exactly."""
    a = np.asarray(raw, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    space = _space_for(a, space)
    if a.shape[0] != space.total_dim:
        raise DimensionMismatch(
            f"matrix side {a.shape[0]} does not match total_dim {space.total_dim}"
        )
    if not np.all(np.isfinite(a)):
        raise NotHermitian("matrix has non-finite entries")
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > HERMITIAN_TOL:
        raise NotHermitian(f"max asymmetry {asym:.3g} exceeds {HERMITIAN_TOL:g}")
    return HermitianOperator(space, (a + a.conj().T) / 2, correction=asym)


def as_operator(x, space: SpaceDescriptor | None = None) -> HermitianOperator:
    """Accept a HermitianOperator, DensityMatrix or raw array."""
    if isinstance(x, HermitianOperator):
        return x
    if isinstance(x, DensityMatrix):
        return x.op
    return validate_hermitian(x, space)


def density_matrix(raw, space: SpaceDescriptor | None = None) -> DensityMatrix:
    """Validate a density matrix.

    Eigenvalues in ``(-1e-10, 0)`` are clamped to zero and the result is
    renormalized; the size of that correction is kept in ``correction``.
    """
    op = as_operator(raw, space)
    tr = op.trace()
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotDensityMatrix(f"trace {tr!r} differs from 1 by more than {TRACE_TOL:g}")
    w, v = np.linalg.eigh(op.entries)
    if w[0] < -PSD_TOL:
        raise NotDensityMatrix(f"minimum eigenvalue {w[0]:.3g} below {-PSD_TOL:g}")
    if w[0] < 0:
        wc = np.clip(w, 0.0, None)
        wc /= wc.sum()
        fixed = (v * wc) @ v.conj().T
        corr = float(np.max(np.abs(fixed - op.entries)))
        return DensityMatrix(HermitianOperator(op.space, (fixed + fixed.conj().T) / 2), corr)
    return DensityMatrix(op)


def as_density(x, space: SpaceDescriptor | None = None) -> DensityMatrix:
    if isinstance(x, DensityMatrix):
        return x
    return density_matrix(x, space)


def zeros(space: SpaceDescriptor) -> HermitianOperator:
    return HermitianOperator(space, np.zeros((space.total_dim, space.total_dim)))


def identity(space: SpaceDescriptor) -> HermitianOperator:
    return HermitianOperator(space, np.eye(space.total_dim))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            z = col[nz[0]]
            v[:, j] = col * (abs(z) / z)
    return v


def eigh(A) -> Spectrum:
    """Deterministic eigendecomposition with ascending eigenvalues.

    Each eigenvector is rotated so its first nonzero entry is real positive.
    Equal eigenvalues are ordered by lexicographic comparison of the
    (real, imag) parts of their eigenvectors.
    """
    a = as_operator(A).entries
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    v = _fix_phase(v)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0

    def key(j):
        col = v[:, j]
        return (round(w[j] / (1e-12 * scale)),
                tuple(np.column_stack([col.real, col.imag]).ravel()))

    order = sorted(range(len(w)), key=key)
    w = w[order]
    v = v[:, order]
    w.flags.writeable = False
    v.flags.writeable = False
    return Spectrum(w, v)


def tensor_product(A, B) -> HermitianOperator:
    a, b = as_operator(A), as_operator(B)
    if a.space.is_bipartite or b.space.is_bipartite:
        raise DimensionMismatch("tensor_product expects two single-system operators")
    space = SpaceDescriptor.bipartite(a.dim, b.dim)
    return HermitianOperator(space, np.kron(a.entries, b.entries))


def partial_transpose(P, subsystem: Literal["first", "second"] = "second") -> HermitianOperator:
    """Transpose one tensor factor of a bipartite operator."""
    p = as_operator(P)
    if not p.space.is_bipartite:
        raise NotBipartite("partial transpose needs a bipartite operator")
    n1, n2 = p.space.dims
    t = p.entries.reshape(n1, n2, n1, n2)
    if subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', not {subsystem!r}")
    return HermitianOperator(p.space, t.reshape(n1 * n2, n1 * n2))


def hs_inner(A, B) -> float:
    """Hilbert-Schmidt inner product ``trace(A B)`` for Hermitian A, B."""
    a, b = as_operator(A), as_operator(B)
    if a.space.total_dim != b.space.total_dim:
        raise DimensionMismatch(f"{a.space.dims} vs {b.space.dims}")
    return float(np.sum(a.entries * b.entries.T).real)


def is_full_range(rho, floor: float = 1e-8) -> bool:
    if floor <= 0:
        raise ValueError("floor must be positive")
    return bool(np.linalg.eigvalsh(as_operator(rho).entries)[0] >= floor)


# Real coordinates w.r.t. the orthonormal Hermitian basis
#   E_aa,  (E_ab + E_ba)/sqrt2,  -i(E_ab - E_ba)/sqrt2   (a < b)
# so that hs_inner(A, B) == coords(A) @ coords(B).

def _triu(d: int):
    return np.triu_indices(d, 1)


def to_real_coords(a: np.ndarray) -> np.ndarray:
    """Coordinates of Hermitian matrices (``(..., d, d)``) as ``(..., d*d)`` reals."""
    a = np.asarray(a)
    d = a.shape[-1]
    iu, ju = _triu(d)
    diag = np.diagonal(a, axis1=-2, axis2=-1).real
    off = a[..., iu, ju]
    # X_ab with a < b; hs_inner picks up Re(X_ab conj(Y_ab)) twice
    return np.concatenate(
        [diag, math.sqrt(2) * off.real, -math.sqrt(2) * off.imag], axis=-1
    )


def from_real_coords(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    iu, ju = _triu(d)
    m = len(iu)
    out = np.zeros(x.shape[:-1] + (d, d), dtype=complex)
    idx = np.arange(d)
    out[..., idx, idx] = x[..., :d]
    off = (x[..., d:d + m] - 1j * x[..., d + m:]) / math.sqrt(2)
    out[..., iu, ju] = off
    out[..., ju, iu] = off.conj()
    return out


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of the d*d-dimensional real space of Hermitian matrices."""
    return from_real_coords(np.eye(d * d), d)


# -- serialization ----------------------------------------------------------

def operator_to_dict(A) -> dict:
    a = as_operator(A)
    return {
        "dims": list(a.space.dims),
        "re": a.entries.real.tolist(),
        "im": a.entries.imag.tolist(),
    }


def operator_from_dict(obj) -> HermitianOperator:
    if not isinstance(obj, dict):
        raise SchemaViolation("operator must be a JSON object")
    for k in ("dims", "re", "im"):
        if k not in obj:
            raise SchemaViolation(f"operator is missing the {k!r} field")
    dims = obj["dims"]
    if (not isinstance(dims, list) or len(dims) not in (1, 2)
            or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims)):
        raise SchemaViolation(f"'dims' must be a list of one or two integers, got {dims!r}")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(f"'re'/'im' must be numeric matrices: {exc}") from exc
    if re.ndim != 2 or re.shape != im.shape:
        raise SchemaViolation(f"'re' {re.shape} and 'im' {im.shape} must be equal 2-D shapes")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise SchemaViolation("entries must be finite")
    space = SpaceDescriptor(tuple(dims))
    return validate_hermitian(re + 1j * im, space)


def write_operator(A, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(operator_to_dict(A), fh, allow_nan=False)
        fh.write("\n")


def load_json(path: str | os.PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def read_operator(path: str | os.PathLike) -> HermitianOperator:
    return operator_from_dict(load_json(path))
