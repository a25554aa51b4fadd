"""Finite spectral triples and their metric diagnostics.

A triple is a finite algebra acting by inclusion on C^N together with a
Hermitian Dirac matrix. The induced Lipschitz seminorm is the operator
norm of the commutator with the Dirac matrix; the triple is metric when
that seminorm vanishes only on real multiples of the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgState, FiniteAlgebra, pure_state, sa_basis
from .kantorovich import (
    SeminormSpec,
    SolveOptions,
    commutator_seminorm,
    mk_distance,
)
from .linalg import check_hermitian, commutator, herm_eig, hermitize, op_norm

KERNEL_GAP_THRESHOLD = 1e-6


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass
class SeminormReport:
    value: float
    witness: np.ndarray | None = None


@dataclass
class FiniteSpectralTriple:
    alg: FiniteAlgebra
    dirac: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.dirac = check_hermitian(self.dirac, tol=1e-10)
        if self.dirac.shape[0] != self.alg.ambient_dim:
            raise ValueError("Dirac dimension does not match the algebra's ambient space")

    @property
    def dim(self) -> int:
        return self.alg.ambient_dim

    def sa_basis(self) -> list[np.ndarray]:
        if "sa" not in self._cache:
            self._cache["sa"] = sa_basis(self.alg)
        return self._cache["sa"]

    def lip_spec(self) -> SeminormSpec:
        if "spec" not in self._cache:
            self._cache["spec"] = commutator_seminorm(self.sa_basis(), self.dirac)
        return self._cache["spec"]


def lip(triple: FiniteSpectralTriple, a: np.ndarray) -> float:
    """L(a) = ||[D, a]|| for self-adjoint a in the algebra."""
    a = check_hermitian(a, tol=1e-8)
    if triple.alg.membership_residual(a) > 1e-8 * (1.0 + op_norm(a)):
        raise DomainError("element is not in the triple's algebra")
    return op_norm(commutator(triple.dirac, a))


def lip_report(triple: FiniteSpectralTriple, a: np.ndarray) -> SeminormReport:
    return SeminormReport(value=lip(triple, a), witness=a)


def dnorm(triple: FiniteSpectralTriple, xi: np.ndarray) -> float:
    """D-norm ||xi|| + ||D xi|| on the underlying Hilbert space."""
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    return float(np.linalg.norm(xi) + np.linalg.norm(triple.dirac @ xi))


@dataclass
class MetricCheckReport:
    passed: bool
    kernel_dim: int
    gap_ratio: float
    identity_overlap: float
    leibniz_worst_slack: float
    failures: list[str]
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.passed


def check_metric(
    triple: FiniteSpectralTriple,
    n_leibniz_samples: int = 40,
    seed: int = 0,
    gap_threshold: float = KERNEL_GAP_THRESHOLD,
) -> MetricCheckReport:
    """Kernel and quasi-Leibniz diagnostics for a candidate metric triple.

    The commutator map restricted to the self-adjoint part must have a
    one-dimensional kernel spanned by the identity; the test is a
    relative spectral-gap condition on its singular values. The Leibniz
    inequality is spot-checked on random pairs.
    """
    sab = triple.sa_basis()
    n = len(sab)
    d = triple.dirac
    cols = [commutator(d, b).ravel() for b in sab]
    a = np.array([np.concatenate([c.real, c.imag]) for c in cols]).T
    s = np.linalg.svd(a, compute_uv=False)
    s = np.concatenate([s, np.zeros(max(0, n - s.size))])
    failures: list[str] = []
    witness = None

    smax = s[0] if s[0] > 0 else 1.0
    gap_ratio = float(s[n - 2] / smax) if n >= 2 else 0.0
    kernel_dim = int(np.sum(s <= gap_threshold * smax))
    if n >= 2 and gap_ratio <= gap_threshold:
        failures.append(
            f"commutator kernel has dimension {kernel_dim} > 1 "
            f"(relative gap {gap_ratio:.2e})"
        )
        # a witness direction in the kernel beyond the identity
        _, _, vt = np.linalg.svd(a, full_matrices=True)
        cand = vt[-2]
        witness = sum(c * b for c, b in zip(cand, sab))

    # The identity must span the kernel direction.
    ident = np.array([np.trace(b).real for b in sab])
    ident = ident / np.linalg.norm(ident)
    _, _, vt = np.linalg.svd(a, full_matrices=True)
    identity_overlap = float(abs(vt[-1] @ ident))
    if identity_overlap < 1.0 - 1e-6:
        failures.append(
            f"kernel direction is not the identity (overlap {identity_overlap:.6f})"
        )

    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(n_leibniz_samples):
        xa = rng.standard_normal(n)
        xb = rng.standard_normal(n)
        am = sum(c * b for c, b in zip(xa, sab))
        bm = sum(c * b for c, b in zip(xb, sab))
        la, lb = op_norm(commutator(d, am)), op_norm(commutator(d, bm))
        na, nb = op_norm(am), op_norm(bm)
        bound = na * lb + nb * la
        prod = am @ bm
        for part in (hermitize(prod), hermitize(-1j * prod)):
            slack = op_norm(commutator(d, part)) - bound
            worst = max(worst, slack)
    if worst > 1e-9 * (1.0 + abs(worst)):
        failures.append(f"quasi-Leibniz violated by {worst:.2e}")

    return MetricCheckReport(
        passed=not failures,
        kernel_dim=kernel_dim,
        gap_ratio=gap_ratio,
        identity_overlap=identity_overlap,
        leibniz_worst_slack=float(worst),
        failures=failures,
        witness=witness,
    )


def diameter(
    triple: FiniteSpectralTriple,
    opts: SolveOptions | None = None,
    restarts: int = 4,
    max_rounds: int = 40,
    seed: int = 0,
    tol: float = 1e-9,
) -> float:
    """sup{ lmax(a) - lmin(a) : L(a) <= 1 }, the state-space diameter.

    Alternates between the Monge-Kantorovich program at a fixed pair of
    pure states and re-extracting extremal eigenvector states from the
    witness; the value sequence is nondecreasing, restarts guard against
    poor starting pairs.
    """
    spec = triple.lip_spec()
    opts = opts or SolveOptions(primal_tol=1e-9)
    rng = np.random.default_rng(seed)
    n = triple.dim
    starts: list[tuple[AlgState, AlgState]] = []
    e = np.eye(n)
    starts.append((pure_state(e[0]), pure_state(e[n - 1])))
    for _ in range(max(0, restarts - 1)):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        starts.append((pure_state(v), pure_state(w)))

    best = 0.0
    for phi, psi in starts:
        prev = -np.inf
        warm = None
        for _ in range(max_rounds):
            res = mk_distance(spec, phi, psi, opts=opts, warm=warm)
            warm = res.warm
            a = spec.matrix_of(res.witness)
            w, v = herm_eig(a)
            spread = float(w[-1] - w[0])
            value = max(res.value, spread)
            phi, psi = pure_state(v[:, -1]), pure_state(v[:, 0])
            if value <= prev + tol * (1.0 + abs(value)):
                prev = max(prev, value)
                break
            prev = value
        best = max(best, prev)
    return best
