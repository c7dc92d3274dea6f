import numpy as np
import pytest

from msbench.channels import QuantumChannel


def random_unitary(rng, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(rng, dim: int = 4) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_cptp_kraus(rng, dim: int = 4, n_kraus: int = 3) -> QuantumChannel:
    """Random CPTP channel from a Haar-ish random Stinespring isometry."""
    g = rng.normal(size=(dim * n_kraus, dim)) + 1j * rng.normal(size=(dim * n_kraus, dim))
    v, _ = np.linalg.qr(g)  # v^dag v = I on the dim-dimensional input
    ops = [v[i * dim:(i + 1) * dim, :] for i in range(n_kraus)]
    return QuantumChannel.from_kraus(ops)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
