"""Finite-dimensional C*-algebras as concrete *-subalgebras of M_N.

An algebra is stored as a Hilbert-Schmidt-orthonormal basis of N x N
matrices spanning a unital *-subalgebra. States are density matrices on
the ambient C^N, evaluated through the trace pairing; every state of a
subalgebra arises this way by restriction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, check_hermitian, eye, hermitize, op_norm

CLOSURE_TOL = 1e-8
_GS_TOL = 1e-10


class AlgebraError(ValueError):
    """Raised when algebra construction or membership checks fail."""


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product trace(a* b)."""
    return complex(np.trace(a.conj().T @ b))


def _gram_schmidt(mats: list[np.ndarray]) -> list[np.ndarray]:
    """Orthonormalize under the HS inner product, with a second pass."""
    basis: list[np.ndarray] = []
    for m in mats:
        v = m.astype(np.complex128)
        for _ in range(2):  # re-orthogonalization pass for stability
            for b in basis:
                v = v - hs_inner(b, v) * b
        nrm = np.sqrt(abs(hs_inner(v, v)))
        if nrm > _GS_TOL:
            basis.append(v / nrm)
    return basis


def _project_residual(m: np.ndarray, basis: list[np.ndarray]) -> float:
    """HS norm of the component of m orthogonal to span(basis)."""
    v = m.astype(np.complex128)
    for b in basis:
        v = v - hs_inner(b, v) * b
    return float(np.sqrt(abs(hs_inner(v, v))))


@dataclass
class FiniteAlgebra:
    """Unital *-subalgebra of M_N given by an HS-orthonormal basis."""

    ambient_dim: int
    basis: list[np.ndarray] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project_coeffs(self, m: np.ndarray) -> np.ndarray:
        """Coefficients of the HS projection of m onto the algebra."""
        return np.array([hs_inner(b, m) for b in self.basis])

    def membership_residual(self, m: np.ndarray) -> float:
        return _project_residual(as_matrix(m), self.basis)

    def contains(self, m: np.ndarray, tol: float = CLOSURE_TOL) -> bool:
        return self.membership_residual(m) <= tol * (1.0 + op_norm(m))

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        """Linear combination of basis matrices."""
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=np.complex128)
        for c, b in zip(coeffs, self.basis):
            out += c * b
        return out

    def validate(self, tol: float = CLOSURE_TOL) -> None:
        """Check unitality and closure under adjoints and products."""
        n = self.ambient_dim
        if _project_residual(eye(n), self.basis) > 1e-9 * n:
            raise AlgebraError("span does not contain the identity")
        for b in self.basis:
            if _project_residual(b.conj().T, self.basis) > tol:
                raise AlgebraError("span not closed under adjoint")
        for a in self.basis:
            for b in self.basis:
                if _project_residual(a @ b, self.basis) > tol:
                    raise AlgebraError("span not closed under products")


def close_algebra(generators: list[np.ndarray], ambient_dim: int) -> FiniteAlgebra:
    """Smallest unital *-algebra of M_N containing the generators.

    Iterates adjoint/product closure rounds until the span dimension
    stabilizes, then runs one more round as a consistency check.
    """
    n = ambient_dim
    mats = [eye(n)]
    for g in generators:
        g = as_matrix(g)
        if g.shape != (n, n):
            raise AlgebraError(f"generator shape {g.shape} != ({n}, {n})")
        mats.append(g)
        mats.append(g.conj().T)
    basis = _gram_schmidt(mats)
    for _ in range(2 * n * n + 2):
        products = [a @ b for a in basis for b in basis]
        adjoints = [a.conj().T for a in basis]
        new_basis = _gram_schmidt(basis + adjoints + products)
        if len(new_basis) == len(basis):
            alg = FiniteAlgebra(ambient_dim=n, basis=new_basis)
            alg.validate()
            return alg
        basis = new_basis
        if len(basis) > n * n:
            raise AlgebraError("closure exceeded the dimension of M_N")
    raise AlgebraError("algebra closure did not stabilize")


def full_matrix_algebra(n: int) -> FiniteAlgebra:
    """All of M_n, with the matrix-unit orthonormal basis."""
    basis = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1.0
            basis.append(e)
    return FiniteAlgebra(ambient_dim=n, basis=basis)


def diagonal_algebra(n: int) -> FiniteAlgebra:
    """The commutative algebra of diagonal matrices in M_n."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    return FiniteAlgebra(ambient_dim=n, basis=basis)


def direct_sum_algebra(a: FiniteAlgebra, b: FiniteAlgebra) -> FiniteAlgebra:
    """A (+) B acting block-diagonally on C^{N_a + N_b}."""
    n = a.ambient_dim + b.ambient_dim
    basis = []
    for m in a.basis:
        e = np.zeros((n, n), dtype=np.complex128)
        e[: a.ambient_dim, : a.ambient_dim] = m
        basis.append(e)
    for m in b.basis:
        e = np.zeros((n, n), dtype=np.complex128)
        e[a.ambient_dim :, a.ambient_dim :] = m
        basis.append(e)
    return FiniteAlgebra(ambient_dim=n, basis=basis)


def sa_basis(alg: FiniteAlgebra) -> list[np.ndarray]:
    """Real-orthonormal basis of the self-adjoint part of the algebra.

    The count equals the complex dimension of the algebra.
    """
    candidates = []
    for b in alg.basis:
        candidates.append(hermitize(b))
        candidates.append(hermitize(1j * b))
    # Gram-Schmidt over the reals; HS inner products of Hermitian
    # matrices are real.
    basis: list[np.ndarray] = []
    for m in candidates:
        v = m.copy()
        for _ in range(2):
            for b in basis:
                v = v - hs_inner(b, v).real * b
        nrm = np.sqrt(abs(hs_inner(v, v)))
        if nrm > _GS_TOL:
            basis.append(hermitize(v / nrm))
    if len(basis) != alg.dim:
        raise AlgebraError(
            f"self-adjoint basis has {len(basis)} elements, expected {alg.dim}"
        )
    return basis


@dataclass
class AlgState:
    """State as a density matrix rho on the ambient C^N; phi(a) = tr(rho a)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = check_hermitian(self.rho, tol=1e-10)
        w = np.linalg.eigvalsh(rho)
        if w.min() < -1e-10:
            raise AlgebraError(f"density matrix not positive (min eig {w.min():.3e})")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > 1e-10:
            raise AlgebraError(f"density matrix trace {tr} != 1")
        self.rho = rho

    def __call__(self, a: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ a))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def pure_state(xi: np.ndarray) -> AlgState:
    """Rank-one projector onto the (nonzero) vector xi."""
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    nrm = np.linalg.norm(xi)
    if nrm < 1e-12:
        raise AlgebraError("cannot build a pure state from the zero vector")
    xi = xi / nrm
    return AlgState(rho=np.outer(xi, xi.conj()))


def basis_state(n: int, i: int) -> AlgState:
    """Pure state on the i-th standard basis vector of C^n."""
    e = np.zeros(n, dtype=np.complex128)
    e[i] = 1.0
    return pure_state(e)


def maximally_mixed(n: int) -> AlgState:
    return AlgState(rho=eye(n) / n)


def random_state(n: int, rng: np.random.Generator) -> AlgState:
    """Hilbert-Schmidt-random density matrix: rho = G G* / tr(G G*)."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return AlgState(rho=hermitize(rho))
