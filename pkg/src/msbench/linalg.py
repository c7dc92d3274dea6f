"""Small dense complex linear algebra used throughout the toolkit.

Matrices are plain 2-D complex numpy arrays, row-major, at most 16x16.
Everything here is a pure function; inputs are never mutated.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS_1Q = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

HERMITICITY_ATOL = 1e-8


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns). The input is
    symmetrized before the solve; a Hermiticity deviation above 1e-8 in
    Frobenius norm is rejected.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix is not square: {m.shape}")
    if frobenius(m - dagger(m)) > HERMITICITY_ATOL:
        raise ValueError("matrix is not Hermitian within 1e-8")
    vals, vecs = np.linalg.eigh(0.5 * (m + dagger(m)))
    return vals.real, vecs


def partial_trace(m, keep, dims) -> np.ndarray:
    """Trace out the subsystems of ``m`` not listed in ``keep``.

    ``dims`` gives the dimension of each subsystem in order; ``keep`` is a
    sequence of subsystem indices to retain (original order preserved).
    """
    m = as_matrix(m)
    dims = list(int(d) for d in dims)
    keep = sorted(int(k) for k in np.atleast_1d(keep))
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} inconsistent with dims {dims}")
    if any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"invalid keep selector {keep} for {n} subsystems")

    t = m.reshape(dims + dims)
    traced = 0
    for q in range(n):
        if q not in keep:
            axis = q - traced
            nleft = len(t.shape) // 2
            t = np.trace(t, axis1=axis, axis2=axis + nleft)
            traced += 1
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def is_unitary(m, atol: float = 1e-10) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return frobenius(dagger(m) @ m - np.eye(m.shape[0])) <= atol


def check_density_matrix(rho, dim: int = 4, atol: float = 1e-8) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD within -1e-8."""
    rho = as_matrix(rho)
    if rho.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    if frobenius(rho - dagger(rho)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError(f"density matrix trace {np.trace(rho):.3g} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho))).min() < -atol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho
