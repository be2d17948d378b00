"""Divided differences of the exponential, stable for (near-)confluent nodes.

Windows of nodes whose spread is at most ``TAYLOR_SPREAD`` are evaluated from
the Taylor series around their midpoint,

    exp[y_0..y_k] = e^m * sum_q h_q(y - m) / (q + k)!,

where ``h_q`` is the complete homogeneous symmetric polynomial; wider windows
use the usual recursive table, whose subtraction is then well conditioned.
"""

from __future__ import annotations

import math

import numpy as np

TAYLOR_SPREAD = 1.0
TAYLOR_TERMS = 24


def _taylor_window(y: np.ndarray) -> float:
    k = len(y) - 1
    m = 0.5 * (y[0] + y[-1])
    d = y - m
    # h[q] over the nodes added so far
    h = d[0] ** np.arange(TAYLOR_TERMS)
    for v in d[1:]:
        for q in range(1, TAYLOR_TERMS):
            h[q] += v * h[q - 1]
    inv_fact = np.array([1.0 / math.factorial(q + k) for q in range(TAYLOR_TERMS)])
    return math.exp(m) * float(np.dot(h, inv_fact))


def _scaled_divdiff(x: np.ndarray) -> float:
    """exp[x_0..x_k] for sorted ``x`` with ``max(x) == 0``."""
    n = len(x)
    prev = np.exp(x)
    for k in range(1, n):
        cur = np.empty(n - k)
        for i in range(n - k):
            j = i + k
            gap = x[j] - x[i]
            if gap <= TAYLOR_SPREAD:
                cur[i] = _taylor_window(x[i:j + 1])
            else:
                cur[i] = (prev[i + 1] - prev[i]) / gap
        prev = cur
    return float(prev[0])


def exp_divdiff(nodes) -> float:
    """Divided difference ``exp[x_0, ..., x_k]`` (order ``k``), nodes may repeat."""
    x = np.sort(np.asarray(nodes, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("need at least one node")
    if not np.all(np.isfinite(x)):
        raise ValueError("nodes must be finite")
    c = x[-1]
    return math.exp(c) * _scaled_divdiff(x - c)


def spectral_k(lam) -> float:
    """``(n-1)! exp[lam_1..lam_n]``: the sphere average of ``exp(<phi|X|phi>)``."""
    lam = np.asarray(lam, dtype=float)
    return math.factorial(len(lam) - 1) * exp_divdiff(lam)


def spectral_k_grad(lam) -> np.ndarray:
    """Partial derivatives of :func:`spectral_k` in each eigenvalue."""
    lam = np.asarray(lam, dtype=float)
    f = math.factorial(len(lam) - 1)
    return np.array([f * exp_divdiff(np.append(lam, v)) for v in lam])


def spectral_k_hess(lam) -> np.ndarray:
    """Hessian of :func:`spectral_k`; nodes repeat so the diagonal picks up a 2."""
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    f = math.factorial(n - 1)
    out = np.empty((n, n))
    for j in range(n):
        for k in range(j, n):
            v = f * (1 + (j == k)) * exp_divdiff(np.append(lam, [lam[j], lam[k]]))
            out[j, k] = out[k, j] = v
    return out
