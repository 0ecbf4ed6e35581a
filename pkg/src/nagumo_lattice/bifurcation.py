"""Fold curves of the periodic equilibrium problem in the (a, d) half-strip.

The critical set is traced as the solution curve of the augmented system

    G_*(u; a, d) = (G(u; a, d), det D_1 G(u; a, d))

with pseudo-arclength continuation, so that the trace passes through points
where the projection onto (a, d) turns.  Those turning points (cusps and
folds of the curve) are roots of

    G_**(u; a, d) = (G_*, det D_{(u,d)} G_*),

where D_{(u,d)} is the Jacobian of G_* with respect to u and d at fixed a.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import equilibria as eq
from .errors import DegenerateTangent, NoConvergence
from .words import Word

FD_STEP = 1e-6
ARC_STEP = 1e-3
SAMPLE_TOL_G = 1e-10
SAMPLE_TOL_DET = 1e-8


class PointKind(enum.Enum):
    CUSP = "CUSP"
    FOLD = "FOLD"


def det_d1g(u, a, d):
    return float(np.linalg.det(eq.jacobian(u, a, d)))


def critical_eigenvalue(u, a, d):
    """Eigenvalue of D_1 G closest to zero (signed)."""
    ev = np.linalg.eigvalsh(eq.jacobian(u, a, d))
    return float(ev[np.argmin(np.abs(ev))])


DEFINING = {"det": det_d1g, "eig": critical_eigenvalue}


def augmented_residual(u, a, d, defining="det"):
    """G_* = (G, det D_1 G); length n + 1."""
    f = DEFINING[defining]
    return np.concatenate([eq.residual(u, a, d), [f(u, a, d)]])


def _fd_grad(f, u, a, d, h=FD_STEP):
    """Centered differences of the scalar f(u, a, d) in (u, a, d)."""
    n = u.shape[0]
    g = np.zeros(n + 2)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        g[j] = (f(u + e, a, d) - f(u - e, a, d)) / (2 * h)
    g[n] = (f(u, a + h, d) - f(u, a - h, d)) / (2 * h)
    g[n + 1] = (f(u, a, d + h) - f(u, a, d - h)) / (2 * h)
    return g


def augmented_jacobian(u, a, d, defining="det"):
    """(n+1) x (n+2) Jacobian of G_* in (u, a, d)."""
    n = u.shape[0]
    M = np.zeros((n + 1, n + 2))
    M[:n, :n] = eq.jacobian(u, a, d)
    M[:n, n] = eq.residual_a(u, a, d)
    M[:n, n + 1] = eq.residual_d(u, a, d)
    M[n] = _fd_grad(DEFINING[defining], u, a, d)
    return M


def fold_of_folds_residual(u, a, d, defining="det"):
    """G_** = (G, det D_1 G, det D_{(u,d)} G_*); length n + 2."""
    n = u.shape[0]
    M = augmented_jacobian(u, a, d, defining)
    Mud = np.delete(M, n, axis=1)
    return np.concatenate([augmented_residual(u, a, d, defining), [np.linalg.det(Mud)]])


@dataclass
class GammaCurve:
    label: str
    samples: list  # (a, d, u)
    cusp_points: list = field(default_factory=list)
    fold_of_folds: list = field(default_factory=list)
    termination: str = ""
    defining: str = "det"

    @property
    def a(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def d(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def u(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    def to_csv(self) -> str:
        n = len(self.samples[0][2])
        rows = [",".join(["a", "d"] + [f"u_{i}" for i in range(1, n + 1)])]
        for a, d, u in self.samples:
            rows.append(",".join(repr(float(v)) for v in (a, d, *u)))
        return "\n".join(rows) + "\n"

    def candidate_indices(self) -> list[int]:
        """Sample indices where da/ds changes sign."""
        a = self.a
        da = np.diff(a)
        out = []
        for i in range(1, len(da)):
            if da[i - 1] * da[i] < 0:
                out.append(i)
        return out

    def d_at(self, a_value):
        """All d values where the trace crosses the vertical line a = a_value
        (linear interpolation between samples)."""
        a, d = self.a, self.d
        out = []
        last = len(a) - 2
        for i in range(len(a) - 1):
            lo, hi = a[i], a[i + 1]
            if lo == hi:
                continue
            # half-open segments so a hit on a shared sample counts once
            if lo <= a_value < hi or hi < a_value <= lo or (i == last and a_value == hi):
                t = (a_value - lo) / (hi - lo)
                out.append(d[i] + t * (d[i + 1] - d[i]))
        return sorted(out)


def _tangent(M):
    _, sv, vt = np.linalg.svd(M)
    if sv[-1] < 1e-10 * max(1.0, sv[0]):
        raise DegenerateTangent("augmented Jacobian is rank deficient", sigma=float(sv[-1]))
    t = vt[-1]
    return t / np.linalg.norm(t)


class _Reduced:
    """u = P z on a symmetry-invariant subspace, equations projected by P^+."""

    def __init__(self, n, basis, defining, d_scale):
        self.n = n
        self.P = np.eye(n) if basis is None else np.asarray(basis, dtype=float)
        self.Pp = np.linalg.pinv(self.P)
        self.m = self.P.shape[1]
        self.defining = defining
        self.scale = np.ones(self.m + 2)
        self.scale[-1] = d_scale

    def unpack(self, x):
        z, a, dn = x[: self.m], x[self.m], x[self.m + 1]
        return self.P @ z, a, dn * self.scale[-1]

    def pack(self, u, a, d):
        return np.concatenate([self.Pp @ u, [a, d / self.scale[-1]]])

    def F(self, x):
        u, a, d = self.unpack(x)
        return np.concatenate([self.Pp @ eq.residual(u, a, d), [DEFINING[self.defining](u, a, d)]])

    def DF(self, x):
        u, a, d = self.unpack(x)
        f = DEFINING[self.defining]
        out = np.zeros((self.m + 1, self.m + 2))
        out[: self.m, : self.m] = self.Pp @ eq.jacobian(u, a, d) @ self.P
        out[: self.m, self.m] = self.Pp @ eq.residual_a(u, a, d)
        out[: self.m, self.m + 1] = self.Pp @ eq.residual_d(u, a, d)
        # differentiate the defining function inside the subspace so that
        # symmetry-protected multiple eigenvalues are not split
        h = FD_STEP
        for j in range(self.m):
            e = h * self.P[:, j]
            out[self.m, j] = (f(u + e, a, d) - f(u - e, a, d)) / (2 * h)
        out[self.m, self.m] = (f(u, a + h, d) - f(u, a - h, d)) / (2 * h)
        out[self.m, self.m + 1] = (f(u, a, d + h) - f(u, a, d - h)) / (2 * h)
        out[:, -1] *= self.scale[-1]
        return out


def polish_fold(u, a, d, fix="a", defining="det", basis=None, tol=1e-12, max_iter=40):
    """Newton on G_* = 0 with either a or d held fixed; returns (u, a, d)."""
    n = len(u)
    red = _Reduced(n, basis, defining, 1.0)
    x = red.pack(np.asarray(u, dtype=float), a, d)
    col = red.m if fix == "a" else red.m + 1
    for _ in range(max_iter):
        f = red.F(x)
        if np.max(np.abs(f)) <= tol:
            break
        M = np.delete(red.DF(x), col, axis=1)
        try:
            step = np.linalg.solve(M, -f)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular system while polishing a fold") from None
        x = np.insert(np.delete(x, col) + step, col, x[col])
    f = red.F(x)
    uu, aa, dd = red.unpack(x)
    if np.max(np.abs(eq.residual(uu, aa, dd))) > SAMPLE_TOL_G or abs(det_d1g(uu, aa, dd)) > SAMPLE_TOL_DET:
        raise NoConvergence("fold polish did not converge", residual=float(np.max(np.abs(f))))
    return uu, float(aa), float(dd)


def trace_gamma(seed, arc_step: float = ARC_STEP, label: str = "", a_range=(0.01, 0.99),
                d_max: float = 0.3, max_steps: int = 20000, both_directions: bool = True,
                basis=None, defining: str = "det", refine: bool = True) -> GammaCurve:
    """Pseudo-arclength continuation of the curve G_* = 0 through ``seed``.

    ``seed`` is (u, a, d) satisfying the augmented system.  Coordinates are
    normalized as (u, a, d / d_max).  ``basis`` optionally restricts u to a
    symmetry-invariant subspace u = P z; ``defining='eig'`` replaces the
    determinant by the critical eigenvalue, which keeps the system regular
    where a double eigenvalue crosses zero.
    """
    u0, a0, d0 = seed
    n = len(u0)
    red = _Reduced(n, basis, defining, d_max)
    x0 = red.pack(np.asarray(u0, dtype=float), a0, d0)
    x0 = _correct_point(red, x0, None, None)
    if x0 is None:
        raise NoConvergence("seed does not satisfy the augmented system")
    t0 = _tangent(red.DF(x0))
    halves = []
    ends = []
    for sign in ((1.0, -1.0) if both_directions else (1.0,)):
        pts, reason = _run_arc(red, x0, sign * t0, arc_step, a_range, d_max, max_steps)
        halves.append(pts)
        ends.append(reason)
    pts = halves[0]
    if len(halves) > 1:
        pts = halves[1][::-1] + halves[0][1:]
    samples = []
    for x in pts:
        u, a, d = red.unpack(x)
        samples.append((float(a), float(d), u))
    curve = GammaCurve(label, samples, termination="/".join(ends), defining=defining)
    if refine:
        for p in cusp_fold_points(curve, basis=basis):
            (curve.cusp_points if p[2] is PointKind.CUSP else curve.fold_of_folds).append((p[0], p[1]))
    return curve


def _correct_point(red, x_pred, t, h, tol=1e-12, max_iter=25):
    """Newton on G_* = 0 plus the pseudo-arclength condition t.(x - x_pred) = 0."""
    x = x_pred.copy()
    for _ in range(max_iter):
        f = red.F(x)
        if t is not None:
            f = np.concatenate([f, [t @ (x - x_pred)]])
        if np.max(np.abs(f)) <= tol:
            return x
        M = red.DF(x)
        if t is not None:
            M = np.vstack([M, t])
            try:
                step = np.linalg.solve(M, -f)
            except np.linalg.LinAlgError:
                return None
        else:
            step = np.linalg.lstsq(M, -f, rcond=None)[0]
        x = x + step
        if not np.all(np.isfinite(x)):
            return None
    f = red.F(x)
    u, a, d = red.unpack(x)
    if np.max(np.abs(eq.residual(u, a, d))) <= SAMPLE_TOL_G and abs(det_d1g(u, a, d)) <= SAMPLE_TOL_DET \
            and np.max(np.abs(f)) <= 1e-10:
        return x
    return None


def _run_arc(red, x0, t0, arc_step, a_range, d_max, max_steps):
    pts = [x0]
    x, t = x0, t0
    h = arc_step
    for _ in range(max_steps):
        x_pred = x + h * t
        x_new = _correct_point(red, x_pred, t, h)
        ok = x_new is not None and np.linalg.norm(x_new - x) <= 3 * h
        if ok:
            try:
                t_new = _tangent(red.DF(x_new))
            except DegenerateTangent:
                ok = False
        if not ok:
            h *= 0.5
            if h < 1e-9:
                return pts, "STEP_UNDERFLOW"
            continue
        if t_new @ t < 0:
            t_new = -t_new
        x, t = x_new, t_new
        pts.append(x)
        h = min(arc_step, h * 1.5)
        u, a, d = red.unpack(x)
        if a < a_range[0] or a > a_range[1]:
            return pts, "LEFT_A_RANGE"
        if d > d_max or d < 0:
            return pts, "LEFT_D_RANGE"
        if len(pts) > 20 and np.linalg.norm(x - x0) < 0.5 * arc_step:
            return pts, "CLOSED"
    return pts, "MAX_STEPS"


def solve_fold_of_folds(u, a, d, tol=1e-10, max_iter=40, defining="det", basis=None):
    """Newton on G_** = 0 from (u, a, d); returns (u, a, d)."""
    n = len(u)
    x = np.concatenate([np.asarray(u, dtype=float), [a, d]])

    def H(x):
        return fold_of_folds_residual(x[:n], x[n], x[n + 1], defining)

    h = 1e-6
    for _ in range(max_iter):
        f = H(x)
        if np.max(np.abs(f)) <= tol:
            break
        M = np.zeros((n + 2, n + 2))
        for j in range(n + 2):
            e = np.zeros(n + 2)
            e[j] = h
            M[:, j] = (H(x + e) - H(x - e)) / (2 * h)
        try:
            step = np.linalg.solve(M, -f)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian for G_**") from None
        x = x + step
        if not np.all(np.isfinite(x)):
            raise NoConvergence("G_** Newton diverged")
    f = H(x)
    if np.max(np.abs(f)) > tol:
        raise NoConvergence("G_** Newton did not converge", residual=float(np.max(np.abs(f))))
    return x[:n], float(x[n]), float(x[n + 1])


def classify_turning_point(u, a, d, defining="det", threshold=1e-3) -> PointKind:
    """CUSP when the curve's tangent has no (a, d) component, FOLD otherwise."""
    M = augmented_jacobian(np.asarray(u), a, d, defining)
    _, _, vt = np.linalg.svd(M)
    t = vt[-1] / np.linalg.norm(vt[-1])
    n = len(u)
    return PointKind.CUSP if abs(t[n + 1]) < threshold else PointKind.FOLD


def cusp_fold_points(curve: GammaCurve, basis=None, tol=1e-10, dedup=1e-7):
    """Refine every sign change of da/ds on ``curve`` into a root of G_**."""
    found = []
    for i in curve.candidate_indices():
        a, d, u = curve.samples[i]
        try:
            uu, aa, dd = solve_fold_of_folds(u, a, d, tol=tol, defining=curve.defining)
        except NoConvergence:
            continue
        if any(abs(aa - p[0]) < dedup and abs(dd - p[1]) < dedup for p in found):
            continue
        found.append((aa, dd, classify_turning_point(uu, aa, dd, curve.defining), uu))
    return [(p[0], p[1], p[2]) for p in found]


@dataclass
class RegionMap:
    n: int
    a_values: np.ndarray
    d_values: np.ndarray
    stable: np.ndarray  # shape (len(d_values), len(a_values))
    unstable: np.ndarray

    def counts_at(self, i_d, i_a):
        return int(self.stable[i_d, i_a]), int(self.unstable[i_d, i_a])

    def to_csv(self) -> str:
        rows = ["a,d,n_stable,n_unstable"]
        for i, d in enumerate(self.d_values):
            for j, a in enumerate(self.a_values):
                rows.append(f"{a!r},{d!r},{int(self.stable[i, j])},{int(self.unstable[i, j])}")
        return "\n".join(rows) + "\n"


def root_counts(n, a, d, multistart_factor=eq.MULTISTART_FACTOR):
    """(stable, unstable) counts excluding the homogeneous roots."""
    roots = eq.enumerate_roots(n, a, d, multistart_factor=multistart_factor)
    st = uns = 0
    for r in roots:
        if r.is_homogeneous():
            continue
        if r.stability is eq.Stability.STABLE:
            st += 1
        else:
            uns += 1
    return st, uns


def region_map(n: int, a_grid: int, d_grid: int, d_max: float,
               multistart_factor=eq.MULTISTART_FACTOR, jobs: int = 1) -> RegionMap:
    """Root-count signature on cell centres of an a_grid x d_grid raster."""
    if n > 5:
        raise ValueError("region maps are limited to n <= 5")
    a_vals = (np.arange(a_grid) + 0.5) / a_grid
    d_vals = (np.arange(d_grid) + 0.5) * d_max / d_grid
    cells = [(i, j) for i in range(d_grid) for j in range(a_grid)]
    args = [(n, float(a_vals[j]), float(d_vals[i]), multistart_factor) for i, j in cells]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_root_counts_star, args))
    else:
        results = [_root_counts_star(x) for x in args]
    st = np.zeros((d_grid, a_grid), dtype=int)
    un = np.zeros((d_grid, a_grid), dtype=int)
    for (i, j), (s, u) in zip(cells, results):
        st[i, j], un[i, j] = s, u
    return RegionMap(n, a_vals, d_vals, st, un)


def _root_counts_star(args):
    return root_counts(*args)


def fold_seed_from_branch(w, a, d_max=0.3, step=1e-3):
    """Seed (u, a, d) for tracing Gamma_[w]: the first fold of the vertical w-branch."""
    from .continuation import ParamPath, continue_branch, Termination
    br = continue_branch(w, ParamPath.vertical(a, d_max), step=step, raise_on_failure=False)
    if br.termination is not Termination.FOLD:
        raise NoConvergence(f"branch {w} at a={a} does not fold below d={d_max}")
    _, fa, fd, u = br.fold_point
    return polish_fold(u, fa, fd, fix="a")


def fold_d(w, a, d_max=0.3, step=1e-3):
    """d at which the vertical w-branch folds at fixed a, polished on G_*."""
    return fold_seed_from_branch(w, a, d_max, step)[2]


def trace_word_gamma(w, a_seed, **kw) -> GammaCurve:
    """Trace Gamma_[w] from the first fold on the vertical path at ``a_seed``."""
    w = Word.parse(w)
    seed = fold_seed_from_branch(w, a_seed, d_max=kw.pop("seed_d_max", 0.3))
    kw.setdefault("label", f"Gamma_[{w}]")
    return trace_gamma(seed, **kw)


def homogeneous_gamma(n: int, arc_step=ARC_STEP, a_range=(0.01, 0.99), **kw) -> GammaCurve:
    """Gamma_[a]: loss of hyperbolicity of the homogeneous state (a, ..., a).

    Traced on the homogeneous subspace with the critical eigenvalue as
    defining function, since for n >= 3 the eigenvalue that crosses zero is
    double and det D_1 G has a double zero there.
    """
    a0 = 0.5 * (a_range[0] + a_range[1])
    k = n // 2
    lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * k / n)
    d0 = a0 * (1 - a0) / lam
    basis = np.ones((n, 1))
    seed = (np.full(n, a0), a0, d0)
    return trace_gamma(seed, arc_step=arc_step, label="Gamma_[a]", a_range=a_range, basis=basis,
                       defining="eig", refine=False, **kw)


def expansion_residual(w, a, traced_d=None, **kw):
    """Traced d_[w](a) minus its closed-form expansion."""
    from .asymptotics import threshold_expansion
    w = Word.parse(w)
    d = fold_d(w, a) if traced_d is None else traced_d
    return d - threshold_expansion(w, a)
