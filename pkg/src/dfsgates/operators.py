"""Dense complex linear algebra on small Hilbert spaces.

Operators are plain ``numpy`` complex arrays: matrices are 2-D, state
vectors 1-D. Nothing here mutates its inputs.
"""
from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, NonHermitianInput

HERMITIAN_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def apply(a, v) -> np.ndarray:
    """Matrix-vector action ``a|v>``."""
    a = as_matrix(a)
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {a.shape} operator to vector of shape {v.shape}")
    return a @ v


def hermiticity_error(a) -> float:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return np.inf
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(a) <= tol


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_matrix(a)
    err = hermiticity_error(a)
    if err > tol:
        raise NonHermitianInput(f"matrix deviates from Hermitian by {err:.3e} (tol {tol:.0e})")
    return a


def spectral_decomposition(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a Hermitian matrix.

    The input is symmetrised before ``eigh`` so that round-off in the
    lower triangle cannot leak into the result.
    """
    h = check_hermitian(h)
    return np.linalg.eigh(0.5 * (h + h.conj().T))


def propagator_from_spectrum(evals: np.ndarray, evecs: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` from a precomputed eigendecomposition of ``H``."""
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def matexp_hermitian(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h``.

    Computed by spectral decomposition, so the result is unitary up to
    eigensolver accuracy.

    Raises:
        NonHermitianInput: if ``h`` is not Hermitian to 1e-12.
    """
    evals, evecs = spectral_decomposition(h)
    return propagator_from_spectrum(evals, evecs, t)


def operator_fidelity(u, v) -> float:
    """Global-phase-insensitive overlap ``|Tr(u^dagger v)| / d``."""
    u, v = as_matrix(u), as_matrix(v)
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise DimensionMismatch(f"fidelity needs equal square shapes, got {u.shape} and {v.shape}")
    d = u.shape[0]
    return float(min(1.0, abs(np.trace(u.conj().T @ v)) / d))


def unitarity_error(u) -> float:
    u = as_matrix(u)
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def commutator(a, b) -> np.ndarray:
    return matmul(a, b) - matmul(b, a)


def basis_state(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v
