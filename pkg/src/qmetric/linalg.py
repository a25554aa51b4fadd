"""Dense complex-matrix primitives shared by every other module.

All matrices are numpy arrays of dtype complex128. Tolerances are
expressed relative to ``op_norm(input) + 1`` so a single precision story
covers matrices of any scale.
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-12


class LinAlgFailure(RuntimeError):
    """Raised when an eigensolver or SVD fails to converge."""


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return a


def herm_defect(m: np.ndarray) -> float:
    """max |m_ij - conj(m_ji)|."""
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Validate that m is Hermitian within tol and return it."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"not square: {m.shape}")
    defect = herm_defect(m)
    if defect > tol * (1.0 + float(np.max(np.abs(m))) if m.size else 1.0):
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (m + m*) / 2."""
    m = as_matrix(m)
    return (m + m.conj().T) / 2


def op_norm(m) -> float:
    """Operator (spectral) norm: the largest singular value."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    try:
        return float(np.linalg.norm(m, 2))
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"SVD did not converge: {exc}") from exc


def herm_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary of column eigenvectors) with
    m = V diag(w) V*.
    """
    m = check_hermitian(m, tol=1e-10)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise LinAlgFailure(f"eigensolver did not converge: {exc}") from exc
    return w, v


def unitary_exp(d, t: float) -> np.ndarray:
    """exp(i t d) for Hermitian d, via eigendecomposition."""
    w, v = herm_eig(d)
    phases = np.exp(1j * t * w)
    return (v * phases) @ v.conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product."""
    return np.kron(as_matrix(a), as_matrix(b))


def direct_sum(a, b) -> np.ndarray:
    """Block-diagonal direct sum."""
    a, b = as_matrix(a), as_matrix(b)
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.complex128)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0] :, a.shape[1] :] = b
    return out


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


# Pauli matrices, used throughout the fixtures and the Clifford construction.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Hermitian matrix with Gaussian entries (GUE-style, unnormalized)."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitize(g) * scale


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform unit vector in C^n."""
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    nrm = np.linalg.norm(v)
    while nrm < 1e-12:  # pragma: no cover - probability zero
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nrm = np.linalg.norm(v)
    return v / nrm
