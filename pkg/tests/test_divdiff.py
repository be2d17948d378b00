import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contens.divdiff import exp_divdiff, spectral_k, spectral_k_grad, spectral_k_hess

mpmath.mp.dps = 120


def oracle(nodes):
    """exp[x_0..x_k] as the corner entry of exp of the bidiagonal Opitz matrix."""
    k = len(nodes)
    m = mpmath.zeros(k, k)
    for i, v in enumerate(nodes):
        m[i, i] = mpmath.mpf(float(v))
        if i + 1 < k:
            m[i, i + 1] = 1
    return mpmath.expm(m)[0, k - 1]


def rel(a, b):
    return abs(a - float(b)) / abs(float(b))


def test_small_cases():
    assert exp_divdiff([0.7]) == pytest.approx(math.exp(0.7), rel=1e-15)
    assert exp_divdiff([0, 1]) == pytest.approx(math.e - 1, rel=1e-14)
    assert exp_divdiff([2, 2]) == pytest.approx(math.exp(2), rel=1e-14)
    assert exp_divdiff([1, 1, 1]) == pytest.approx(math.e / 2, rel=1e-14)


def test_closed_form_examples():
    assert spectral_k([0, 0]) == pytest.approx(1.0, rel=1e-15)
    assert spectral_k([1, -1]) == pytest.approx(math.sinh(1), rel=1e-14)
    assert spectral_k([5, 5, 5]) == pytest.approx(math.exp(5), rel=1e-14)
    assert spectral_k([0, 0, 0, 0]) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("nodes", [
    [0.0, 1e-9, 2e-9],
    [1.0, 1.0 + 1e-7, 1.0 + 3e-7, 1.0 + 4e-7],
    [-30.0, -29.5, 0.0, 0.3],
    [-5, 0, 5, 10, 15, 20],
    [3.0, 3.0, 3.0, 3.0 + 1e-12, 3.2, 3.2],
    [0.0, 0.5, 0.9999, 1.0001, 2.0],
])
def test_against_high_precision_oracle(nodes):
    assert rel(exp_divdiff(nodes), oracle(nodes)) <= 1e-12


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=7))
@settings(max_examples=200, deadline=None)
def test_random_nodes_against_oracle(nodes):
    assert rel(exp_divdiff(nodes), oracle(nodes)) <= 1e-12


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6), st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_permutation_symmetry(nodes, r):
    shuffled = list(nodes)
    r.shuffle(shuffled)
    assert exp_divdiff(shuffled) == exp_divdiff(nodes)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(-3, 3))
@settings(max_examples=100, deadline=None)
def test_shift_identity(lam, c):
    lam = np.array(lam)
    assert spectral_k(lam + c) == pytest.approx(math.exp(c) * spectral_k(lam), rel=1e-12)


@given(st.lists(st.floats(-4, 4), min_size=1, max_size=6))
@settings(max_examples=100, deadline=None)
def test_gradient_sums_to_k(lam):
    # d/dc K(lam + c) = K  means  sum of partials = K
    assert spectral_k_grad(lam).sum() == pytest.approx(spectral_k(lam), rel=1e-12)


@pytest.mark.parametrize("lam", [[0.3, -1.2, 0.8], [0.0, 0.0, 1e-8, 2.0], [1.0, -1.0]])
def test_grad_and_hess_finite_differences(lam):
    lam = np.array(lam, dtype=float)
    h = 1e-5
    g = spectral_k_grad(lam)
    hs = spectral_k_hess(lam)
    for k in range(len(lam)):
        e = np.zeros(len(lam))
        e[k] = h
        fd = (spectral_k(lam + e) - spectral_k(lam - e)) / (2 * h)
        assert fd == pytest.approx(g[k], rel=1e-8)
        fd2 = (spectral_k_grad(lam + e) - spectral_k_grad(lam - e)) / (2 * h)
        assert np.allclose(fd2, hs[:, k], rtol=1e-7, atol=1e-9)


def test_hessian_positive_definite():
    hs = spectral_k_hess([0.1, -0.4, 0.9, 0.0])
    assert np.linalg.eigvalsh(hs)[0] > 0


def test_rejects_bad_nodes():
    with pytest.raises(ValueError):
        exp_divdiff([])
    with pytest.raises(ValueError):
        exp_divdiff([0.0, float("nan")])
