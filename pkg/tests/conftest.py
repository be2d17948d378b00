import numpy as np
import pytest

from contens.operators import SpaceDescriptor, density_matrix, validate_hermitian


def random_hermitian(rng, d, norm=None, space=None):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = (m + m.conj().T) / 2
    if norm is not None:
        m *= norm / np.linalg.norm(m)
    return validate_hermitian(m, space or SpaceDescriptor.single(d))


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, floor=0.0, space=None):
    """Random density matrix with every eigenvalue >= floor."""
    p = rng.dirichlet(np.ones(d))
    p = floor + (1 - d * floor) * p
    u = random_unitary(rng, d)
    return density_matrix((u * p) @ u.conj().T, space or SpaceDescriptor.single(d))


SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, 1j], [-1j, 0]])
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)
