"""Periodic equilibria of the Nagumo lattice equation.

An n-periodic equilibrium is a root of

    G(u; a, d)_i = d (u_{i-1} - 2 u_i + u_{i+1}) + g(u_i; a),   g(u; a) = u(1-u)(u-a)

with cyclic indices.  Everything here works on small dense systems (n <= 8).
Most array functions accept a leading batch dimension.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .errors import NoConvergence, SingularJacobian
from .words import Word

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MARGINAL_TOL = 1e-9
DEDUP_TOL = 1e-7
MULTISTART_FACTOR = 200


@dataclass(frozen=True)
class ParameterPoint:
    a: float
    d: float

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0) or self.d < 0.0:
            raise ValueError(f"({self.a}, {self.d}) is outside the half-strip [0,1] x [0,inf)")

    def as_tuple(self) -> tuple[float, float]:
        return (self.a, self.d)


class Stability(enum.Enum):
    STABLE = "STABLE"
    UNSTABLE = "UNSTABLE"
    MARGINAL = "MARGINAL"


def cubic(u, a):
    return u * (1.0 - u) * (u - a)


def cubic_deriv(u, a):
    return -3.0 * u * u + 2.0 * (1.0 + a) * u - a


def cubic_deriv2(u, a):
    return -6.0 * u + 2.0 * (1.0 + a)


def laplacian(u):
    """Cyclic second difference along the last axis."""
    u = np.asarray(u, dtype=float)
    prev, nxt = _neighbours(u.shape[-1])
    return u[..., prev] - 2.0 * u + u[..., nxt]


@lru_cache(maxsize=None)
def _neighbours(n: int):
    i = np.arange(n)
    return (i - 1) % n, (i + 1) % n


@lru_cache(maxsize=None)
def _laplacian_matrix(n: int) -> np.ndarray:
    shift = np.roll(np.eye(n), 1, axis=1)
    B = shift + shift.T - 2.0 * np.eye(n)
    B.setflags(write=False)
    return B


def laplacian_matrix(n: int) -> np.ndarray:
    return _laplacian_matrix(n).copy()


def residual(u, a, d):
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)[..., None] if np.ndim(d) else d
    a = np.asarray(a, dtype=float)[..., None] if np.ndim(a) else a
    return d * laplacian(u) + cubic(u, a)


def jacobian(u, a, d):
    """D_1 G = d B + diag(g'(u_i; a)); symmetric."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    B = _laplacian_matrix(n)
    if np.ndim(a):
        a = np.asarray(a, dtype=float)[..., None]
    diag = cubic_deriv(u, a)
    J = np.zeros(u.shape + (n,))
    idx = np.arange(n)
    J[..., idx, idx] = diag
    d = np.asarray(d, dtype=float)[..., None, None] if np.ndim(d) else d
    return J + d * B


def residual_a(u, a, d):
    """Partial derivative of G with respect to a."""
    u = np.asarray(u, dtype=float)
    return -u * (1.0 - u)


def residual_d(u, a, d):
    """Partial derivative of G with respect to d."""
    return laplacian(u)


def classify(eigenvalues, marginal_tol: float = MARGINAL_TOL) -> Stability:
    """STABLE if every eigenvalue is below -tol, MARGINAL if one lies in
    [-tol, tol] (non-hyperbolic), UNSTABLE otherwise."""
    ev = np.asarray(eigenvalues)
    if ev.max() < -marginal_tol:
        return Stability.STABLE
    if np.any(np.abs(ev) <= marginal_tol):
        return Stability.MARGINAL
    return Stability.UNSTABLE


def morse_index(eigenvalues, marginal_tol: float = MARGINAL_TOL) -> int:
    return int(np.sum(np.asarray(eigenvalues) > marginal_tol))


@dataclass
class Equilibrium:
    u: np.ndarray
    a: float
    d: float
    eigenvalues: np.ndarray
    stability: Stability
    det: float
    residual_norm: float
    iterations: int = 0
    type_word: Optional[Word] = None

    @property
    def at(self) -> ParameterPoint:
        return ParameterPoint(self.a, self.d)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def index(self) -> int:
        return morse_index(self.eigenvalues)

    def is_homogeneous(self, tol: float = DEDUP_TOL) -> bool:
        return bool(np.ptp(self.u) <= tol)

    def to_record(self) -> dict:
        rec = {
            "u": [float(x) for x in self.u],
            "a": float(self.a),
            "d": float(self.d),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "stability": self.stability.value,
        }
        if self.type_word is not None:
            rec["type_word"] = str(self.type_word)
        return rec


def make_equilibrium(u, a, d, iterations=0, type_word=None, marginal_tol=MARGINAL_TOL):
    u = np.array(u, dtype=float)
    J = jacobian(u, a, d)
    ev = np.linalg.eigvalsh(J)
    return Equilibrium(
        u=u, a=float(a), d=float(d), eigenvalues=ev,
        stability=classify(ev, marginal_tol), det=float(np.linalg.det(J)),
        residual_norm=float(np.max(np.abs(residual(u, a, d)))),
        iterations=iterations, type_word=type_word,
    )


def stability(e: Equilibrium, marginal_tol: float = MARGINAL_TOL) -> Stability:
    return classify(np.linalg.eigvalsh(jacobian(e.u, e.a, e.d)), marginal_tol)


def newton_solve(u0, a, d, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER,
                 box=(-0.5, 1.5), line_search=True) -> Equilibrium:
    """Newton's method for G(u; a, d) = 0.

    Full steps are taken unless the residual norm increases, in which case the
    step is halved up to 20 times.  Iterates leaving ``box`` (pass None to
    disable the guard) count as divergence.
    """
    u = np.array(u0, dtype=float)
    if box is not None and (u.min() < box[0] or u.max() > box[1]):
        raise NoConvergence(f"initial guess outside the box {box}", iterations=0)
    F = residual(u, a, d)
    fnorm = np.max(np.abs(F))
    for it in range(max_iter + 1):
        if fnorm <= tol:
            return make_equilibrium(u, a, d, iterations=it)
        if it == max_iter:
            break
        J = jacobian(u, a, d)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            raise SingularJacobian("LU factorization broke down", iterations=it) from None
        lam = 1.0
        u_new = u + step
        F_new = residual(u_new, a, d)
        fn_new = np.max(np.abs(F_new))
        # backtracking only while far from the root; near it the residual
        # is at round-off level and may tick up harmlessly
        if line_search and fnorm > 1e-8:
            for _ in range(20):
                if fn_new <= fnorm:
                    break
                lam *= 0.5
                u_new = u + lam * step
                F_new = residual(u_new, a, d)
                fn_new = np.max(np.abs(F_new))
        u, F, fnorm = u_new, F_new, fn_new
        if not np.all(np.isfinite(u)):
            break
        if box is not None and (u.min() < box[0] or u.max() > box[1]):
            raise NoConvergence(f"iterate left the box {box}", iterations=it + 1)
    raise NoConvergence(f"residual {fnorm:.3e} after {max_iter} iterations",
                        iterations=max_iter, residual=float(fnorm))


def batched_newton(U, a, d, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER, bound=10.0):
    """Undamped Newton on a stack of starting points.

    Returns the final iterates and a mask of rows whose residual dropped to
    ``tol``; rows that blow past ``bound`` or hit a singular Jacobian are
    frozen and reported as failures.
    """
    U = np.array(U, dtype=float)
    alive = np.ones(U.shape[0], dtype=bool)
    done = np.zeros(U.shape[0], dtype=bool)
    for _ in range(max_iter + 1):
        F = residual(U, a, d)
        fn = np.max(np.abs(F), axis=-1)
        done |= alive & (fn <= tol)
        work = alive & ~done
        if not work.any():
            break
        J = jacobian(U[work], a, d)
        dets = np.linalg.det(J)
        ok = np.isfinite(dets) & (np.abs(dets) > 1e-300)
        sel = np.flatnonzero(work)
        alive[sel[~ok]] = False
        if ok.any():
            rows = sel[ok]
            U[rows] += np.linalg.solve(J[ok], -F[rows][..., None])[..., 0]
            bad = ~np.all(np.isfinite(U[rows]), axis=-1) | (np.max(np.abs(U[rows]), axis=-1) > bound)
            alive[rows[bad]] = False
    return U, done & alive


def _continue_seeds_vertically(seeds, a, d, max_dd=1e-3, corrector_iter=12):
    """Batched natural-parameter continuation of d = 0 seeds up to ``d``.

    Branches that stop converging (typically at folds) are dropped; the
    survivors are only used as root candidates, not for naming.
    """
    U = np.array(seeds, dtype=float)
    if d == 0.0:
        return U
    steps = max(10, int(np.ceil(d / max_dd)))
    ds = np.linspace(0.0, d, steps + 1)
    alive = np.ones(U.shape[0], dtype=bool)
    for d0, d1 in zip(ds[:-1], ds[1:]):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        V = U[idx]
        J = jacobian(V, a, d0)
        try:
            tangent = np.linalg.solve(J, -laplacian(V)[..., None])[..., 0]
        except np.linalg.LinAlgError:
            tangent = np.zeros_like(V)
        Vp = V + (d1 - d0) * tangent
        Vc, conv = batched_newton(Vp, a, d1, tol=1e-11, max_iter=corrector_iter, bound=2.0)
        U[idx] = Vc
        alive[idx[~conv]] = False
    return U[alive]


def lattice_points(n: int, a: float) -> np.ndarray:
    import itertools
    return np.array(list(itertools.product((0.0, a, 1.0), repeat=n)), dtype=float)


def dedupe(U, tol=DEDUP_TOL) -> np.ndarray:
    """Sort rows lexicographically and drop rows within ``tol`` (sup norm) of
    an earlier kept row."""
    if len(U) == 0:
        return np.zeros((0,) + np.shape(U)[1:])
    U = np.asarray(U, dtype=float)
    # collapse exact grid neighbours first; the greedy pass below then only
    # sees a handful of rows per root
    _, first = np.unique(np.round(U / tol), axis=0, return_index=True)
    U = U[np.sort(first)]
    order = np.lexsort(U.T[::-1])
    U = U[order]
    kept: list[np.ndarray] = []
    for row in U:
        if not any(np.max(np.abs(row - k)) <= tol for k in kept):
            kept.append(row)
    return np.array(kept)


def enumerate_roots(n: int, a: float, d: float, multistart_factor: int = MULTISTART_FACTOR,
                    seed: int = 0, marginal_tol: float = MARGINAL_TOL) -> list[Equilibrium]:
    """All real roots found from the 3^n continued seeds plus a quasi-random sweep.

    Used as the brute-force oracle; missing roots are a test failure rather
    than a runtime error.
    """
    if n > 8:
        raise ValueError("enumeration is limited to n <= 8")
    cands = [_continue_seeds_vertically(lattice_points(n, a), a, d)]
    n_ms = multistart_factor * 3 ** n
    if n_ms > 0:
        pts = qmc.Halton(d=n, scramble=True, seed=seed).random(n_ms)
        pts = -0.1 + 1.2 * pts
        for chunk in np.array_split(pts, max(1, n_ms // 50000)):
            U, ok = batched_newton(chunk, a, d)
            cands.append(U[ok])
    U = np.concatenate(cands, axis=0)
    # real roots of G with d >= 0 lie in [0, 1]^n
    inside = np.all((U > -1e-9) & (U < 1 + 1e-9), axis=1)
    U = U[inside]
    # quadratic polish of everything before de-duplication
    U, ok = batched_newton(U, a, d, tol=NEWTON_TOL)
    U = dedupe(U[ok])
    return [make_equilibrium(u, a, d, marginal_tol=marginal_tol) for u in U]


def circulant_eigenvalues(v: float, a: float, d: float, n: int) -> np.ndarray:
    """Spectrum of D_1 G at the homogeneous state (v, ..., v), sorted."""
    k = np.arange(n)
    return np.sort(cubic_deriv(v, a) + d * (2.0 * np.cos(2.0 * np.pi * k / n) - 2.0))
