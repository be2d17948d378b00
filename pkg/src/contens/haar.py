"""Counter-based Haar sampling on unit spheres and product tori.

Every sample is a pure function of ``(seed, stream, index)``.  The words for
sample ``i`` of a ``dim``-dimensional sphere occupy a fixed slot
``[i * W, (i + 1) * W)`` of a Philox4x64 stream keyed by ``(seed, stream)``,
with ``W = 2 * dim`` rounded up to a multiple of four, so any shard of
indices reproduces exactly the same vectors as a single sequential pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MomentOverflow

_U64_TO_UNIT = 2.0 ** -53
MAX_SEED = 2 ** 64


def _words_per_sample(dim: int) -> int:
    return 4 * math.ceil(2 * dim / 4)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


@dataclass(frozen=True)
class SphereSampler:
    """Haar-distributed unit vectors in C^dim, keyed by ``(seed, stream)``."""

    dim: int
    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        object.__setattr__(self, "seed", _check_seed(self.seed))

    def block(self, start: int, stop: int) -> np.ndarray:
        """Samples ``start .. stop-1`` as a ``(stop - start, dim)`` complex array."""
        if start < 0 or stop < start:
            raise ValueError(f"bad index range [{start}, {stop})")
        count = stop - start
        w = _words_per_sample(self.dim)
        bitgen = np.random.Philox(key=self.seed + (self.stream << 64))
        bitgen.advance(start * w // 4)
        raw = bitgen.random_raw(count * w).reshape(count, w)[:, : 2 * self.dim]
        u = ((raw >> np.uint64(11)).astype(float) + 0.5) * _U64_TO_UNIT
        # Box-Muller on consecutive word pairs
        r = np.sqrt(-2.0 * np.log(u[:, 0::2]))
        theta = 2.0 * np.pi * u[:, 1::2]
        z = r * np.cos(theta) + 1j * (r * np.sin(theta))
        return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True)
class ProductSampler:
    """Pairs of independent Haar vectors in C^n1 x C^n2 sharing one seed.

    The first factor uses stream 0 (so it coincides with
    ``SphereSampler(n1, seed)``), the second factor stream 1.
    """

    dims: tuple[int, int]
    seed: int

    @property
    def first(self) -> SphereSampler:
        return SphereSampler(self.dims[0], self.seed, 0)

    @property
    def second(self) -> SphereSampler:
        return SphereSampler(self.dims[1], self.seed, 1)

    def block(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        return self.first.block(start, stop), self.second.block(start, stop)

    def product_block(self, start: int, stop: int) -> np.ndarray:
        """Product vectors ``phi (x) phi'`` in the row-major flat basis."""
        a, b = self.block(start, stop)
        return (a[:, :, None] * b[:, None, :]).reshape(len(a), -1)


def sampler_for(dims, seed: int):
    """SphereSampler for ``(n,)`` or ProductSampler for ``(n1, n2)``."""
    dims = tuple(dims)
    if len(dims) == 1:
        return SphereSampler(dims[0], seed)
    return ProductSampler(dims, seed)


def state_block(dims, seed: int, start: int, stop: int) -> np.ndarray:
    """Flat sample vectors for a single sphere or a product torus."""
    s = sampler_for(dims, seed)
    if isinstance(s, SphereSampler):
        return s.block(start, stop)
    return s.product_block(start, stop)


def sample_unit_vector(sampler: SphereSampler, index: int) -> np.ndarray:
    if index < 0:
        raise ValueError("index must be non-negative")
    return sampler.block(index, index + 1)[0]


def sample_product(sampler: ProductSampler, index: int) -> tuple[np.ndarray, np.ndarray]:
    if index < 0:
        raise ValueError("index must be non-negative")
    a, b = sampler.block(index, index + 1)
    return a[0], b[0]


def dirichlet_moment_exact(n: int, exponents) -> Fraction:
    """``E[prod_k |phi_k|^(2 m_k)]`` over the unit sphere of C^n, exactly.

    The squared moduli are uniform on the simplex, giving
    ``(n-1)! prod m_k! / (n - 1 + sum m_k)!``.  Missing trailing exponents
    are zero.
    """
    m = [int(e) for e in exponents]
    if n < 1:
        raise ValueError("n must be positive")
    if len(m) > n or any(e < 0 for e in m):
        raise ValueError(f"need at most {n} non-negative exponents, got {m}")
    if not any(m):
        raise ValueError("at least one exponent must be positive")
    num = math.factorial(n - 1) * math.prod(math.factorial(e) for e in m)
    return Fraction(num, math.factorial(n - 1 + sum(m)))


def dirichlet_moment(n: int, exponents) -> float:
    value = dirichlet_moment_exact(n, exponents)
    out = float(value)
    if out == 0.0 and value != 0:
        raise MomentOverflow(f"moment {exponents} in dimension {n} underflows a double")
    return out
