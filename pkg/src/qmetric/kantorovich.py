"""Convex programs behind every Monge-Kantorovich-type quantity.

Three program shapes cover the toolkit:

* ``solve_max_linear`` maximizes a linear objective over an intersection
  of spectral-norm balls (state distances under seminorm constraints),
  via a Chambolle-Pock primal-dual iteration with singular-value
  clipping and a certified duality gap.
* ``dual_dnorm`` evaluates sup{ |<v, z>| : ||z|| + ||D z|| <= 1 } exactly
  through an eigenbasis reduction (no iteration).
* ``dual_maxform_norm`` evaluates dual norms of max-form D-norms on
  direct-sum modules (vector constraints, Euclidean projections).
* ``quotient_seminorm`` minimizes a coupling seminorm over one
  coordinate of a direct sum (the quantum-isometry quotient).

Each solver emits a diagnostics record with iteration counts and
residuals; brute-force oracles with recorded seeds live alongside for
cross-checking at small dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .algebra import AlgState, FiniteAlgebra, hs_inner
from .linalg import as_matrix, hermitize, op_norm


class SolverFailure(RuntimeError):
    """Solver stopped without reaching its tolerance."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics


class UnboundedSeminorm(ValueError):
    """The objective grows along a kernel direction of the seminorm."""


@dataclass
class SolveOptions:
    max_iters: int = 20000
    primal_tol: float = 1e-7
    dual_tol: float = 1e-7
    step_scale: float = 0.95
    rng_seed: int = 0

    def __post_init__(self):
        if self.primal_tol <= 0 or self.dual_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverDiagnostics:
    iterations: int
    primal_value: float
    dual_bound: float
    duality_gap: float
    adjoint_residual: float
    converged: bool

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Seminorm specifications
# ---------------------------------------------------------------------------


@dataclass
class SeminormTerm:
    """One term w * ||Phi(x)||_op; stack[i] is the image of basis element i."""

    stack: np.ndarray  # (n, M, M) complex
    weight: float = 1.0

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x, self.stack, axes=(0, 0))

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.tensordot(self.stack.conj(), y, axes=([1, 2], [0, 1])).real

    def norms_batch(self, xs: np.ndarray) -> np.ndarray:
        mats = np.tensordot(xs, self.stack, axes=(1, 0))
        return np.linalg.svd(mats, compute_uv=False)[:, 0]


@dataclass
class SeminormSpec:
    """Seminorm max_k w_k ||Phi_k(x)||_op on real coefficients over a basis.

    The basis is a list of Hermitian matrices spanning the self-adjoint
    part of the domain algebra; elements are sum_i x_i basis[i].
    """

    basis: list[np.ndarray]
    terms: list[SeminormTerm]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def value(self, x: np.ndarray) -> float:
        return max(t.weight * op_norm(t.apply(x)) for t in self.terms)

    def value_batch(self, xs: np.ndarray) -> np.ndarray:
        out = np.zeros(xs.shape[0])
        for t in self.terms:
            np.maximum(out, t.weight * t.norms_batch(xs), out=out)
        return out

    def matrix_of(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(self.basis[0])
        for c, b in zip(x, self.basis):
            out = out + c * b
        return out

    def coeffs_of(self, a: np.ndarray, tol: float = 1e-7) -> np.ndarray:
        """Real coefficients of a Hermitian element over the basis."""
        a = as_matrix(a)
        x = np.array([hs_inner(b, a).real for b in self.basis])
        resid = op_norm(a - self.matrix_of(x))
        if resid > tol * (1.0 + op_norm(a)):
            raise ValueError(
                f"element is outside the seminorm domain (residual {resid:.2e})"
            )
        return x

    def eval_matrix(self, a: np.ndarray) -> float:
        return self.value(self.coeffs_of(a))

    def identity_coeffs(self) -> np.ndarray:
        n = self.basis[0].shape[0]
        return np.array([hs_inner(b, np.eye(n)).real for b in self.basis])

    def validate(self, tol: float = 1e-9) -> None:
        """The seminorm must vanish on the identity element."""
        v = self.value(self.identity_coeffs())
        if v > tol:
            raise ValueError(f"seminorm does not vanish on the identity ({v:.2e})")

    # -- kernel geometry, cached per spec ----------------------------------

    def _kernel_data(self):
        if "kernel" not in self._cache:
            rows = []
            for t in self.terms:
                flat = t.stack.reshape(self.dim, -1) * t.weight
                rows.append(flat.real.T)
                rows.append(flat.imag.T)
            a = np.vstack(rows)
            u, s, vt = np.linalg.svd(a, full_matrices=True)
            smax = s[0] if s.size and s[0] > 0 else 1.0
            kernel_mask = np.zeros(self.dim, dtype=bool)
            kernel_mask[: s.size] = s <= 1e-10 * smax
            kernel_mask[s.size :] = True
            kernel = vt[kernel_mask]
            smin_pos = float(s[~kernel_mask[: s.size]].min()) if (~kernel_mask[: s.size]).any() else 1.0
            self._cache["kernel"] = (kernel, smin_pos)
        return self._cache["kernel"]

    def kernel_basis(self) -> np.ndarray:
        """Orthonormal rows spanning the numerical kernel of the seminorm."""
        return self._kernel_data()[0]

    def feasible_norm_bound(self) -> float:
        """Bound on ||x||_2 over {L(x) <= 1, x orthogonal to the kernel}.

        Uses ||Phi_k x||_op >= ||Phi_k x||_F / sqrt(M_k) and the smallest
        nonzero singular value of the stacked weighted constraint map.
        """
        _, smin = self._kernel_data()
        max_root_dim = max(np.sqrt(t.stack.shape[1]) for t in self.terms)
        alpha = smin / (np.sqrt(len(self.terms)) * max_root_dim)
        return 1.0 / max(alpha, 1e-300)


def commutator_seminorm(basis: list[np.ndarray], dirac: np.ndarray) -> SeminormSpec:
    """The seminorm a -> ||[D, a]||_op over the given self-adjoint basis."""
    d = as_matrix(dirac)
    stack = np.stack([d @ b - b @ d for b in basis])
    spec = SeminormSpec(basis=list(basis), terms=[SeminormTerm(stack=stack)])
    spec.validate()
    return spec


def max_seminorm(basis: list[np.ndarray], specs: list[SeminormSpec]) -> SeminormSpec:
    """Pointwise max of seminorms sharing one coefficient basis."""
    terms = [t for s in specs for t in s.terms]
    spec = SeminormSpec(basis=list(basis), terms=terms)
    spec.validate()
    return spec


def scale_seminorm(spec: SeminormSpec, c: float) -> SeminormSpec:
    terms = [SeminormTerm(stack=t.stack, weight=c * t.weight) for t in spec.terms]
    return SeminormSpec(basis=spec.basis, terms=terms)


# ---------------------------------------------------------------------------
# maximize c.x over { max_k w_k ||Phi_k(x)||_op <= 1 }
# ---------------------------------------------------------------------------


def _clip_spectral(y: np.ndarray, radius: float) -> np.ndarray:
    u, s, vt = np.linalg.svd(y, full_matrices=False)
    return (u * np.minimum(s, radius)) @ vt


def _project_simplex(w: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1}."""
    ws = np.sort(w)[::-1]
    css = np.cumsum(ws) - 1.0
    idx = np.arange(1, w.size + 1)
    cond = ws - css / idx > 0
    rho = idx[cond][-1]
    tau = css[rho - 1] / rho
    return np.maximum(w - tau, 0.0)


def _project_density(v: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(hermitize(v))
    p = _project_simplex(w)
    return (u * p) @ u.conj().T


@dataclass
class DensityTerm:
    """Subtracts lambda_max(B(x)) from the objective; stack is Hermitian."""

    stack: np.ndarray  # (n, M, M)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x, self.stack, axes=(0, 0))

    def adjoint(self, rho: np.ndarray) -> np.ndarray:
        return np.tensordot(self.stack.conj(), rho, axes=([1, 2], [0, 1])).real


def _operator_norm_estimate(terms: list, n: int, iters: int = 60) -> float:
    rng = np.random.default_rng(7)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 1.0
    for _ in range(iters):
        z = np.zeros(n)
        for t in terms:
            w = getattr(t, "weight", 1.0)
            z += w**2 * t.adjoint(t.apply(x))
        lam = np.linalg.norm(z)
        if lam < 1e-30:
            return 1e-15
        x = z / lam
    return float(np.sqrt(lam))


def _kernel_beyond_identity(spec: SeminormSpec) -> np.ndarray:
    """Orthonormal rows spanning the seminorm kernel modulo the identity."""
    kernel = spec.kernel_basis()
    if kernel.size == 0:
        return kernel
    ident = spec.identity_coeffs()
    nrm = np.linalg.norm(ident)
    if nrm > 0:
        ident = ident / nrm
        kernel = kernel - np.outer(kernel @ ident, ident)
    q, r = np.linalg.qr(kernel.T)
    keep = np.abs(np.diag(r)) > 1e-10
    return q.T[keep]


def check_bounded(spec: SeminormSpec, c: np.ndarray, tol: float = 1e-8) -> None:
    """Fail loudly if the objective overlaps the kernel modulo identity."""
    extra = _kernel_beyond_identity(spec)
    if extra.size == 0:
        return
    overlap = np.linalg.norm(extra @ c)
    if overlap > tol * (1.0 + np.linalg.norm(c)):
        raise UnboundedSeminorm(
            f"objective overlaps the seminorm kernel (residual {overlap:.2e}); "
            "the program is unbounded"
        )


@dataclass
class MaxLinearResult:
    value: float
    witness: np.ndarray  # feasible coefficient vector
    diagnostics: SolverDiagnostics
    warm: tuple = field(default=None, repr=False)


def solve_max_linear(
    spec: SeminormSpec,
    c: np.ndarray,
    opts: SolveOptions | None = None,
    warm: tuple | None = None,
    strict: bool = True,
    density_terms: list[DensityTerm] | None = None,
) -> MaxLinearResult:
    """Maximize c.x - sum_l lambda_max(B_l(x)) subject to spec(x) <= 1.

    With no density terms this is the plain linear program over an
    intersection of spectral-norm balls. The Chambolle-Pock iteration
    dualizes each ball (prox by singular-value clipping) and each
    lambda_max term (prox by projection onto density matrices); the dual
    bound sum_k r_k ||y_k||_nuc is corrected by the adjoint residual
    times a bound on feasible ||x||, giving a certified gap.
    """
    opts = opts or SolveOptions()
    dens = density_terms or []
    c = np.asarray(c, dtype=float)
    check_bounded(spec, c)
    kernel = spec.kernel_basis()
    if kernel.size:
        c = c - kernel.T @ (kernel @ c)
    if np.linalg.norm(c) < 1e-14 and not dens:
        diag = SolverDiagnostics(0, 0.0, 0.0, 0.0, 0.0, True)
        return MaxLinearResult(0.0, np.zeros(spec.dim), diag)

    terms = spec.terms
    radii = [1.0 / t.weight for t in terms]
    lnorm = _operator_norm_estimate(list(terms) + list(dens), spec.dim)
    sigma = tau = opts.step_scale / max(lnorm, 1e-15)
    xbound = spec.feasible_norm_bound()

    if warm is not None:
        x = warm[0].copy()
        ys = [y.copy() for y in warm[1]]
        rhos = [r.copy() for r in warm[2]]
    else:
        x = np.zeros(spec.dim)
        ys = [np.zeros(t.stack.shape[1:], dtype=np.complex128) for t in terms]
        rhos = [
            np.eye(dt.stack.shape[1], dtype=np.complex128) / dt.stack.shape[1]
            for dt in dens
        ]
    xbar = x.copy()

    def objective(xv: np.ndarray) -> float:
        val = float(c @ xv)
        for dt in dens:
            val -= float(np.linalg.eigvalsh(hermitize(dt.apply(xv)))[-1])
        return val

    best_val = -np.inf
    best_x = x.copy()
    gap = np.inf
    resid = np.inf
    it = 0
    check_every = 25
    for it in range(1, opts.max_iters + 1):
        for k, t in enumerate(terms):
            v = ys[k] + sigma * t.apply(xbar)
            ys[k] = v - sigma * _clip_spectral(v / sigma, radii[k])
        for l, dt in enumerate(dens):
            rhos[l] = _project_density(rhos[l] + sigma * dt.apply(xbar))
        grad = c.copy()
        for k, t in enumerate(terms):
            grad -= t.adjoint(ys[k])
        for l, dt in enumerate(dens):
            grad -= dt.adjoint(rhos[l])
        x_new = x + tau * grad
        if kernel.size:
            x_new = x_new - kernel.T @ (kernel @ x_new)
        xbar = 2 * x_new - x
        x = x_new

        if it % check_every == 0 or it == opts.max_iters:
            lval = spec.value(x)
            x_f = x / lval if lval > 1e-12 else x
            val = objective(x_f)
            if val > best_val:
                best_val = val
                best_x = x_f.copy()
            dual = sum(
                r * np.linalg.svd(y, compute_uv=False).sum() for r, y in zip(radii, ys)
            )
            resid = float(np.linalg.norm(grad))
            dual_bound = dual + resid * xbound
            gap = dual_bound - best_val
            if gap <= opts.primal_tol * (1.0 + abs(best_val)):
                diag = SolverDiagnostics(it, best_val, dual_bound, gap, resid, True)
                return MaxLinearResult(best_val, best_x, diag, warm=(x, ys, rhos))

    dual = sum(r * np.linalg.svd(y, compute_uv=False).sum() for r, y in zip(radii, ys))
    dual_bound = dual + resid * xbound
    diag = SolverDiagnostics(it, best_val, dual_bound, gap, resid, False)
    if strict and gap > 10 * opts.primal_tol * (1.0 + abs(best_val)):
        raise SolverFailure(
            f"primal-dual gap {gap:.3e} above tolerance after {it} iterations", diag
        )
    return MaxLinearResult(best_val, best_x, diag, warm=(x, ys, rhos))


def state_objective(spec: SeminormSpec, phi: AlgState, psi: AlgState) -> np.ndarray:
    """Coefficients of a -> phi(a) - psi(a) over the spec basis."""
    delta = phi.rho - psi.rho
    return np.array([np.trace(delta @ b).real for b in spec.basis])


def mk_distance(
    spec: SeminormSpec,
    phi: AlgState,
    psi: AlgState,
    opts: SolveOptions | None = None,
    warm: tuple | None = None,
    strict: bool = True,
) -> MaxLinearResult:
    """Monge-Kantorovich distance sup{ |phi(a) - psi(a)| : L(a) <= 1 }."""
    c = state_objective(spec, phi, psi)
    return solve_max_linear(spec, c, opts=opts, warm=warm, strict=strict)


def mk_bruteforce(
    spec: SeminormSpec,
    phi: AlgState,
    psi: AlgState,
    n_samples: int = 100_000,
    seed: int = 0,
    polish_rounds: int = 400,
    polish_top: int = 32,
) -> dict:
    """Brute-force oracle for mk_distance: dense random search plus polish.

    Maximizes the homogeneous ratio (c.x) / L(x); entirely independent of
    the primal-dual path. The seed is recorded in the returned report.
    """
    rng = np.random.default_rng(seed)
    c = state_objective(spec, phi, psi)
    n = spec.dim
    xs = rng.standard_normal((n_samples, n))
    norms = spec.value_batch(xs)
    ok = norms > 1e-12
    ratios = np.where(ok, (xs @ c) / np.where(ok, norms, 1.0), -np.inf)
    order = np.argsort(ratios)[::-1][:polish_top]
    cand = xs[order] / norms[order][:, None]
    best = float(ratios[order[0]])
    step = 0.5
    for _ in range(polish_rounds):
        trial = cand + step * rng.standard_normal(cand.shape)
        tn = spec.value_batch(trial)
        ok = tn > 1e-12
        tv = np.where(ok, (trial @ c) / np.where(ok, tn, 1.0), -np.inf)
        cv = cand @ c
        improved = tv > cv
        cand[improved] = trial[improved] / tn[improved][:, None]
        step *= 0.985
    vals = cand @ c
    best = max(best, float(vals.max()))
    return {"value": best, "seed": seed, "n_samples": n_samples}


# ---------------------------------------------------------------------------
# dual D-norm: sup{ |<v, z>| : ||z|| + ||D z|| <= 1 }, exact eigenreduction
# ---------------------------------------------------------------------------


def dual_dnorm(v: np.ndarray, dirac: np.ndarray) -> tuple[float, np.ndarray]:
    """Dual norm of z -> ||z|| + ||Dz|| at v, with an optimal witness.

    Splits v = a + D b per eigencoordinate and minimizes
    max(||a||, ||b||) over the one-parameter optimal family; the witness
    z* attains |<v, z*>| equal to the returned value.
    """
    v = np.asarray(v, dtype=np.complex128).ravel()
    if np.linalg.norm(v) < 1e-300:
        return 0.0, np.zeros_like(v)
    w, vec = np.linalg.eigh(as_matrix(dirac))
    u = vec.conj().T @ v
    lam2 = w**2

    def split(rho: float):
        a = u * (rho / (rho + lam2))
        b = np.where(lam2 > 0, u * (1.0 / (rho + lam2)) * w, 0.0)
        return a, b

    def gap(rho: float) -> float:
        a, b = split(rho)
        return np.linalg.norm(a) - np.linalg.norm(b)

    lo, hi = 1e-18, 1e18
    if gap(lo) >= 0:
        rho = lo
    elif gap(hi) <= 0:
        rho = hi
    else:
        for _ in range(200):
            mid = np.sqrt(lo * hi)
            if gap(mid) >= 0:
                hi = mid
            else:
                lo = mid
        rho = np.sqrt(lo * hi)
    a, b = split(rho)
    value = float(max(np.linalg.norm(a), np.linalg.norm(b)))

    # Witness: coordinates proportional to the optimal split pattern.
    t = np.abs(u) * (rho / (rho + lam2))
    phases = np.where(np.abs(u) > 0, u / np.where(np.abs(u) > 0, np.abs(u), 1.0), 1.0)
    zeta = phases * t
    denom = np.linalg.norm(zeta) + np.linalg.norm(w * zeta)
    if denom > 1e-300:
        zeta = zeta / denom
    witness = vec @ zeta
    attained = abs(np.vdot(v, witness))
    if attained > value:  # guard against roundoff ordering
        value = float(attained)
    return value, witness


def dnorm_value(dirac: np.ndarray, xi: np.ndarray) -> float:
    xi = np.asarray(xi, dtype=np.complex128).ravel()
    return float(np.linalg.norm(xi) + np.linalg.norm(as_matrix(dirac) @ xi))


def dual_dnorm_bruteforce(
    v: np.ndarray,
    dirac: np.ndarray,
    n_samples: int = 100_000,
    seed: int = 0,
    polish_rounds: int = 400,
) -> dict:
    """Sphere-sampling oracle for dual_dnorm, with hill-climb polish."""
    rng = np.random.default_rng(seed)
    v = np.asarray(v, dtype=np.complex128).ravel()
    d = as_matrix(dirac)
    n = v.size
    zs = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    denom = np.linalg.norm(zs, axis=1) + np.linalg.norm(zs @ d.T, axis=1)
    vals = np.abs(zs @ v.conj()) / denom
    order = np.argsort(vals)[::-1][:16]
    cand = zs[order] / denom[order][:, None]
    step = 0.5
    for _ in range(polish_rounds):
        trial = cand + step * (
            rng.standard_normal(cand.shape) + 1j * rng.standard_normal(cand.shape)
        )
        tden = np.linalg.norm(trial, axis=1) + np.linalg.norm(trial @ d.T, axis=1)
        tval = np.abs(trial @ v.conj()) / tden
        cval = np.abs(cand @ v.conj())
        improved = tval > cval
        cand[improved] = trial[improved] / tden[improved][:, None]
        step *= 0.985
    best = float(np.max(np.abs(cand @ v.conj())))
    return {"value": best, "seed": seed, "n_samples": n_samples}


# ---------------------------------------------------------------------------
# max-form D-norm duals on direct sums (vector constraint cone program)
# ---------------------------------------------------------------------------


class VectorConstraint:
    """Base: a ball constraint on a linear image of the module vector."""

    def apply(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def gauge(self, z: np.ndarray) -> float:
        """Constraint value scaled so feasibility is gauge <= 1."""
        raise NotImplementedError


class EuclideanBall(VectorConstraint):
    """||A z||_2 <= r."""

    def __init__(self, a: np.ndarray, radius: float):
        self.a = np.asarray(a, dtype=np.complex128)
        self.radius = float(radius)

    def apply(self, z):
        return self.a @ z

    def adjoint(self, y):
        return self.a.conj().T @ y

    def project(self, u):
        nrm = np.linalg.norm(u)
        return u if nrm <= self.radius else u * (self.radius / nrm)

    def support(self, y):
        return self.radius * float(np.linalg.norm(y))

    def gauge(self, z):
        return float(np.linalg.norm(self.a @ z)) / self.radius


class SumBall(VectorConstraint):
    """||A1 z|| + ||A2 z|| <= r (the D-norm ball shape)."""

    def __init__(self, a1: np.ndarray, a2: np.ndarray, radius: float = 1.0):
        self.a1 = np.asarray(a1, dtype=np.complex128)
        self.a2 = np.asarray(a2, dtype=np.complex128)
        self.radius = float(radius)
        self.m1 = self.a1.shape[0]

    def apply(self, z):
        return np.concatenate([self.a1 @ z, self.a2 @ z])

    def adjoint(self, y):
        return self.a1.conj().T @ y[: self.m1] + self.a2.conj().T @ y[self.m1 :]

    def project(self, u):
        u1, u2 = u[: self.m1], u[self.m1 :]
        p, q = np.linalg.norm(u1), np.linalg.norm(u2)
        if p + q <= self.radius:
            return u
        # Project (p, q) onto {p', q' >= 0, p' + q' <= r} in the plane,
        # then rescale the blocks.
        lam = (p + q - self.radius) / 2.0
        p2, q2 = max(p - lam, 0.0), max(q - lam, 0.0)
        s = p2 + q2
        if s > self.radius:  # one coordinate clipped at zero
            if p2 > q2:
                p2, q2 = self.radius, 0.0
            else:
                p2, q2 = 0.0, self.radius
        out = np.concatenate(
            [u1 * (p2 / p if p > 0 else 0.0), u2 * (q2 / q if q > 0 else 0.0)]
        )
        return out

    def support(self, y):
        y1, y2 = y[: self.m1], y[self.m1 :]
        return self.radius * float(max(np.linalg.norm(y1), np.linalg.norm(y2)))

    def gauge(self, z):
        return (float(np.linalg.norm(self.a1 @ z)) + float(np.linalg.norm(self.a2 @ z))) / self.radius


def _cone_norm_estimate(constraints, n, iters=50):
    rng = np.random.default_rng(11)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    z /= np.linalg.norm(z)
    lam = 1.0
    for _ in range(iters):
        w = np.zeros(n, dtype=np.complex128)
        for cst in constraints:
            w += cst.adjoint(cst.apply(z))
        lam = np.linalg.norm(w)
        if lam < 1e-30:
            return 1e-15
        z = w / lam
    return float(np.sqrt(lam))


def dual_maxform_norm(
    v: np.ndarray,
    constraints: list[VectorConstraint],
    opts: SolveOptions | None = None,
    feasible_norm_bound: float = np.sqrt(2.0),
) -> tuple[float, SolverDiagnostics]:
    """sup{ |<v, z>| : z in every constraint ball }, certified gap.

    The feasible_norm_bound must dominate ||z||_2 over the feasible set;
    for coupled D-norm balls each coordinate has norm at most 1.
    """
    opts = opts or SolveOptions()
    v = np.asarray(v, dtype=np.complex128).ravel()
    vnorm = np.linalg.norm(v)
    if vnorm < 1e-300:
        return 0.0, SolverDiagnostics(0, 0.0, 0.0, 0.0, 0.0, True)
    n = v.size
    lnorm = _cone_norm_estimate(constraints, n)
    sigma = tau = opts.step_scale / max(lnorm, 1e-15)

    z = np.zeros(n, dtype=np.complex128)
    zbar = z.copy()
    ys = [np.zeros_like(c.apply(z)) for c in constraints]
    best_val = 0.0
    gap = np.inf
    it = 0
    for it in range(1, opts.max_iters + 1):
        for k, cst in enumerate(constraints):
            u = ys[k] + sigma * cst.apply(zbar)
            ys[k] = u - sigma * cst.project(u / sigma)
        grad = np.zeros(n, dtype=np.complex128)
        for k, cst in enumerate(constraints):
            grad += cst.adjoint(ys[k])
        z_new = z + tau * (v - grad)
        zbar = 2 * z_new - z
        z = z_new
        if it % 25 == 0 or it == opts.max_iters:
            g = max(cst.gauge(z) for cst in constraints)
            z_f = z / g if g > 1.0 else z
            val = abs(np.vdot(v, z_f))
            if val > best_val:
                best_val = float(val)
            dual = sum(cst.support(y) for cst, y in zip(constraints, ys))
            resid = float(np.linalg.norm(grad - v))
            dual_bound = dual + resid * feasible_norm_bound
            gap = dual_bound - best_val
            if gap <= opts.primal_tol * (1.0 + best_val):
                return best_val, SolverDiagnostics(it, best_val, dual_bound, gap, resid, True)
    diag = SolverDiagnostics(it, best_val, dual_bound, gap, resid, False)
    raise SolverFailure(f"dual max-form norm gap {gap:.3e} after {it} iterations", diag)


def modular_mk(bundle, pair1, pair2, opts: SolveOptions | None = None) -> float:
    """Module-level Monge-Kantorovich distance between modular states.

    ``pair = (phi, omega)`` with phi a state of the base algebra and
    omega a module vector with D-norm at most 1 (up to tolerance). The
    objective reduces to a dual D-norm of the induced vector difference.
    """
    tol = 1e-6
    for _, omega in (pair1, pair2):
        d = bundle.dnorm(omega)
        if d > 1.0 + tol:
            raise ValueError(f"modular state vector has D-norm {d:.6f} > 1")
    v1 = bundle.functional_vector(*pair1)
    v2 = bundle.functional_vector(*pair2)
    return bundle.dual_norm(v1 - v2, opts=opts)


def modular_mk_bruteforce(
    bundle, pair1, pair2, n_samples: int = 100_000, seed: int = 0, polish_rounds: int = 300
) -> dict:
    """Sphere-sampling oracle for modular_mk (feasible zeta, then polish)."""
    rng = np.random.default_rng(seed)
    v = bundle.functional_vector(*pair1) - bundle.functional_vector(*pair2)
    n = v.size
    zs = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    denom = bundle.dnorm_batch(zs)
    vals = np.abs(zs @ v.conj()) / denom
    order = np.argsort(vals)[::-1][:16]
    cand = zs[order] / denom[order][:, None]
    step = 0.5
    for _ in range(polish_rounds):
        trial = cand + step * (
            rng.standard_normal(cand.shape) + 1j * rng.standard_normal(cand.shape)
        )
        tden = bundle.dnorm_batch(trial)
        tval = np.abs(trial @ v.conj()) / tden
        cval = np.abs(cand @ v.conj())
        improved = tval > cval
        cand[improved] = trial[improved] / tden[improved][:, None]
        step *= 0.985
    best = float(np.max(np.abs(cand @ v.conj())))
    return {"value": best, "seed": seed, "n_samples": n_samples}


# ---------------------------------------------------------------------------
# quotient seminorm: inf over the complementary coordinate of a coupling
# ---------------------------------------------------------------------------


def _project_weighted_nuclear_l1(ys: list[np.ndarray], alphas: list[float]) -> list[np.ndarray]:
    """Project onto { sum_k alpha_k ||y_k||_nuc <= 1 } blockwise via SVD."""
    svds = [np.linalg.svd(y, full_matrices=False) for y in ys]
    total = sum(a * sv[1].sum() for a, sv in zip(alphas, svds))
    if total <= 1.0:
        return ys
    # Soft-threshold singular values: s -> max(0, s - lam * alpha_k),
    # bisect lam until the weighted sum hits 1.
    lo, hi = 0.0, max(sv[1].max() / a for a, sv in zip(alphas, svds) if sv[1].size)
    for _ in range(100):
        lam = 0.5 * (lo + hi)
        tot = sum(
            a * np.maximum(sv[1] - lam * a, 0.0).sum() for a, sv in zip(alphas, svds)
        )
        if tot > 1.0:
            lo = lam
        else:
            hi = lam
    lam = hi
    out = []
    for a, (u, s, vt) in zip(alphas, svds):
        out.append((u * np.maximum(s - lam * a, 0.0)) @ vt)
    return out


def quotient_seminorm(
    spec: SeminormSpec,
    side_indices: np.ndarray,
    other_indices: np.ndarray,
    target_coeffs: np.ndarray,
    opts: SolveOptions | None = None,
) -> tuple[float, np.ndarray]:
    """inf over the complementary coordinate of a coupling seminorm.

    ``side_indices`` select the coefficients held fixed at
    ``target_coeffs``; the minimization runs over the remaining
    coefficients. Returns (value, witness coefficients for the free
    side).
    """
    opts = opts or SolveOptions(max_iters=30000)
    side_indices = np.asarray(side_indices)
    other_indices = np.asarray(other_indices)
    nfree = other_indices.size

    # Affine decomposition Phi_k(x_a (+) b) = A_k b + d_k.
    stacks = [t.stack[other_indices] for t in spec.terms]
    fixed = np.zeros(spec.dim)
    fixed[side_indices] = target_coeffs
    offsets = [t.apply(fixed) for t in spec.terms]
    weights = [t.weight for t in spec.terms]
    alphas = [1.0 / w for w in weights]

    free_terms = [SeminormTerm(stack=s, weight=w) for s, w in zip(stacks, weights)]
    lnorm = _operator_norm_estimate(free_terms, nfree)
    sigma = tau = opts.step_scale / max(lnorm, 1e-15)

    b = np.zeros(nfree)
    bbar = b.copy()
    ys = [np.zeros(t.stack.shape[1:], dtype=np.complex128) for t in free_terms]

    def primal_value(bv: np.ndarray) -> float:
        return max(
            w * op_norm(t.apply(bv) + d)
            for t, d, w in zip(free_terms, offsets, weights)
        )

    best_val = primal_value(b)
    best_b = b.copy()
    stall = 0
    last_check = best_val
    for it in range(1, opts.max_iters + 1):
        # f = max_k of scaled norms has conjugate equal to the indicator
        # of the weighted-nuclear l1 ball, so the dual prox is a plain
        # projection.
        vs = [y + sigma * (t.apply(bbar) + d) for y, t, d in zip(ys, free_terms, offsets)]
        ys = _project_weighted_nuclear_l1(vs, alphas)
        grad = np.zeros(nfree)
        for y, t in zip(ys, free_terms):
            grad += t.adjoint(y)
        b_new = b - tau * grad
        bbar = 2 * b_new - b
        b = b_new
        if it % 50 == 0:
            val = primal_value(b)
            if val < best_val:
                best_val = val
                best_b = b.copy()
            if abs(val - last_check) <= opts.primal_tol * (1.0 + abs(val)):
                stall += 1
                if stall >= 4:
                    break
            else:
                stall = 0
            last_check = val
    return best_val, best_b
