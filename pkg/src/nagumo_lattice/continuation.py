"""Tracking named roots along paths in the (a, d) half-strip.

A root of type w is followed from the lattice point w|_a at d = 0 with a
tangent predictor and a Newton corrector.  A branch ends at a fold, where the
root collides with a partner and disappears.  A singular Jacobian that the
root survives (the homogeneous a-state at d = a(1-a)/3 for n = 3, and the
branches passing through it) is recorded as a marginal crossing instead.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import equilibria as eq
from .errors import NoConvergence, SingularJacobian
from .words import Letter, Word

FOLD_BISECT_TOL = 1e-10
STEP_UNDERFLOW = 1e-12
BOUNDARY_TOL = 1e-8
PATH_EQUALITY_TOL = 1e-8
DETOUR_OFFSETS = tuple(s * 0.05 * k for k in range(1, 7) for s in (1, -1))
# fine detours resolve regions that only connect around a fold of a fold
FINE_OFFSETS = tuple(s * 2.5e-5 * 2 ** k for k in range(8) for s in (1, -1))
CANDIDATE_OFFSETS = DETOUR_OFFSETS + FINE_OFFSETS
FD_STEP = 1e-6
HOMOGENEOUS_TOL = 1e-8


class Termination(enum.Enum):
    REACHED_TARGET = "REACHED_TARGET"
    FOLD = "FOLD"
    LEFT_BOX = "LEFT_BOX"
    STEP_UNDERFLOW = "STEP_UNDERFLOW"


class Membership(enum.Enum):
    INSIDE = "INSIDE"
    OUTSIDE = "OUTSIDE"
    BOUNDARY = "BOUNDARY"
    UNKNOWN = "UNKNOWN"


class ParamPath:
    """Piecewise-linear path through (a, d) waypoints, parametrized by arclength."""

    def __init__(self, waypoints):
        pts = np.array(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("a path needs at least two (a, d) waypoints")
        if np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > 1) or np.any(pts[:, 1] < 0):
            raise ValueError("path leaves the half-strip")
        seg = np.diff(pts, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        keep = lengths > 0
        if not keep.any():
            raise ValueError("degenerate path")
        pts = np.vstack([pts[:1], pts[1:][keep]])
        seg, lengths = seg[keep], lengths[keep]
        self.waypoints = pts
        self.knots = np.concatenate([[0.0], np.cumsum(lengths)])
        self.directions = seg / lengths[:, None]

    @classmethod
    def vertical(cls, a, d_end, d_start=0.0):
        return cls([(a, d_start), (a, d_end)])

    @property
    def length(self) -> float:
        return float(self.knots[-1])

    @property
    def start(self):
        return tuple(self.waypoints[0])

    @property
    def end(self):
        return tuple(self.waypoints[-1])

    def _segment(self, s, side="right"):
        i = int(np.searchsorted(self.knots, s, side=side)) - 1
        return min(max(i, 0), len(self.directions) - 1)

    def point(self, s):
        i = self._segment(s)
        a, d = self.waypoints[i] + (s - self.knots[i]) * self.directions[i]
        return float(min(max(a, 0.0), 1.0)), float(max(d, 0.0))

    def direction(self, s, side="right"):
        return self.directions[self._segment(s, side)]

    def reversed(self) -> "ParamPath":
        return ParamPath(self.waypoints[::-1])


@dataclass
class BranchSample:
    s: float
    a: float
    d: float
    u: np.ndarray
    det: float
    min_eig: float
    index: int


@dataclass
class Branch:
    path: ParamPath
    samples: list
    termination: Termination
    fold_point: Optional[tuple] = None  # (s, a, d, u)
    crossings: list = field(default_factory=list)  # [(s, a, d, u)]
    word: Optional[Word] = None

    @property
    def reached(self) -> bool:
        return self.termination is Termination.REACHED_TARGET

    @property
    def endpoint(self) -> BranchSample:
        return self.samples[-1]

    def at(self, s, tol=1e-12) -> Optional[BranchSample]:
        for smp in self.samples:
            if abs(smp.s - s) <= tol:
                return smp
        return None

    def metadata(self) -> dict:
        meta = {"termination": self.termination.value,
                "word": None if self.word is None else str(self.word),
                "waypoints": self.path.waypoints.tolist(),
                "crossings": [{"s": c[0], "a": c[1], "d": c[2], "u": list(map(float, c[3]))}
                              for c in self.crossings]}
        if self.fold_point is not None:
            s, a, d, u = self.fold_point
            meta["fold_point"] = {"s": s, "a": a, "d": d, "u": list(map(float, u))}
        return meta

    def to_csv(self) -> str:
        n = self.samples[0].u.shape[0]
        lines = [",".join(["a", "d"] + [f"u_{i}" for i in range(1, n + 1)] + ["det", "min_eig"])]
        for smp in self.samples:
            vals = [smp.a, smp.d, *smp.u, smp.det, smp.min_eig]
            lines.append(",".join(repr(float(v)) for v in vals))
        lines.append("# " + json.dumps(self.metadata(), sort_keys=True))
        return "\n".join(lines) + "\n"


def _sample(s, a, d, u) -> BranchSample:
    J = eq.jacobian(u, a, d)
    ev = np.linalg.eigvalsh(J)
    return BranchSample(float(s), a, d, np.array(u), float(np.linalg.det(J)),
                        float(ev[np.argmin(np.abs(ev))]), eq.morse_index(ev))


def _path_tangent(u, path, s, side="right"):
    a, d = path.point(s)
    da, dd = path.direction(s, side)
    rhs = eq.residual_a(u, a, d) * da + eq.residual_d(u, a, d) * dd
    try:
        return np.linalg.solve(eq.jacobian(u, a, d), -rhs)
    except np.linalg.LinAlgError:
        return np.zeros_like(u)


def _correct(u_pred, a, d, max_iter=15):
    try:
        return eq.newton_solve(u_pred, a, d, max_iter=max_iter).u
    except (NoConvergence, SingularJacobian):
        return None


def _det(u, a, d):
    return np.linalg.det(eq.jacobian(u, a, d))


def _polish_fold_on_path(u, s, path, max_iter=30):
    """Newton on (G, det D_1 G) = 0 in the unknowns (u, s) along the path."""
    n = u.shape[0]
    x = np.concatenate([u, [s]])
    lo, hi = path.knots[path._segment(s)], path.knots[path._segment(s) + 1]

    def F(x):
        a, d = path.point(x[-1])
        return np.concatenate([eq.residual(x[:n], a, d), [_det(x[:n], a, d)]])

    for _ in range(max_iter):
        f = F(x)
        if np.max(np.abs(f)) <= 1e-13:
            break
        a, d = path.point(x[-1])
        da, dd = path.direction(x[-1])
        M = np.zeros((n + 1, n + 1))
        M[:n, :n] = eq.jacobian(x[:n], a, d)
        M[:n, n] = eq.residual_a(x[:n], a, d) * da + eq.residual_d(x[:n], a, d) * dd
        for j in range(n + 1):
            e = np.zeros(n + 1)
            e[j] = FD_STEP
            M[n, j] = (F(x + e)[n] - F(x - e)[n]) / (2 * FD_STEP)
        try:
            step = np.linalg.solve(M, -f)
        except np.linalg.LinAlgError:
            return None
        x = x + step
        if not (lo - 1e-6 <= x[-1] <= hi + 1e-6) or not np.all(np.isfinite(x)):
            return None
    f = F(x)
    if np.max(np.abs(f[:n])) > 1e-10 or abs(f[n]) > 1e-8:
        return None
    return x[:n], float(x[-1])


def track(u0, path: ParamPath, step: float = 1e-3, checkpoints: Sequence[float] = (),
          max_jump: Optional[float] = None, raise_on_failure: bool = True,
          word: Optional[Word] = None) -> Branch:
    """Follow the root through ``u0`` at the start of ``path``.

    Natural-parameter continuation with adaptive steps: halve on corrector
    failure, grow by 1.3 after four successes, never exceed ``step``.  A step
    is accepted only when the Morse index is unchanged and the sup-norm jump
    stays below ``max_jump`` (default ``10 * step``).
    """
    if not (0 < step <= 0.01):
        raise ValueError("step must lie in (0, 0.01]")
    max_jump = 10 * step if max_jump is None else max_jump
    a0, d0 = path.point(0.0)
    u = _correct(np.asarray(u0, dtype=float), a0, d0)
    if u is None:
        raise NoConvergence("starting point is not a root")
    stops = sorted({float(x) for x in path.knots[1:]} | {float(c) for c in checkpoints
                                                         if 0 < c < path.length})
    samples = [_sample(0.0, a0, d0, u)]
    crossings = []
    s, h, wins = 0.0, step, 0
    L = path.length
    prev = None  # previous (s, u) for the secant predictor

    def attempt(u_from, s_from, s_to, index, secant=None):
        a1, d1 = path.point(s_to)
        if secant is not None:
            u_pred = u_from + (s_to - s_from) * secant
        else:
            u_pred = u_from + (s_to - s_from) * _path_tangent(u_from, path, s_from)
        u_new = _correct(u_pred, a1, d1)
        if u_new is None:
            return None, "fail"
        if np.max(np.abs(u_new - u_from)) > max_jump:
            return None, "jump"
        smp = _sample(s_to, a1, d1, u_new)
        if smp.index != index:
            return smp, "index"
        return smp, "ok"

    def finish(term, fold=None):
        return Branch(path, samples, term, fold, crossings, word)

    while s < L - 1e-14:
        nxt = next((x for x in stops if x > s + 1e-14), L)
        s_to = min(s + h, nxt)
        cur = samples[-1]
        smp, status = attempt(u, s, s_to, cur.index)
        if status == "ok":
            prev = (s, u)
            s, u = smp.s, smp.u
            if abs(s - nxt) < 1e-14:
                s = nxt
                smp.s = nxt
            samples.append(smp)
            wins += 1
            if wins >= 4:
                h, wins = min(h * 1.3, step), 0
            continue
        wins = 0
        if status == "index" or h < FOLD_BISECT_TOL:
            # singular point between s and s_to (or just beyond s): bisect
            lo, u_lo, hi = s, u, (s_to if status == "index" else s + 2 * h)
            while hi - lo > FOLD_BISECT_TOL:
                mid = 0.5 * (lo + hi)
                m, st = attempt(u_lo, lo, mid, cur.index)
                if st == "ok":
                    lo, u_lo = mid, m.u
                else:
                    hi = mid
            a_lo, d_lo = path.point(lo)
            # survive-through test from the secant direction
            slope = None
            if prev is not None and lo > prev[0]:
                slope = (u_lo - prev[1]) / (lo - prev[0])
            delta = max(1e-6, 4 * (hi - lo))
            # only the homogeneous root may pass a singular point; any other
            # branch would violate the nonsingular-path requirement
            if lo + delta <= L and np.ptp(u_lo) <= HOMOGENEOUS_TOL:
                past, st = attempt(u_lo, lo, lo + delta, -1, secant=slope)
                cross_ok = past is not None and st in ("index", "ok")
                if cross_ok:
                    lim = 50 * delta * (1 + (0 if slope is None else np.max(np.abs(slope))))
                    cross_ok = np.max(np.abs(past.u - u_lo)) <= lim
                if cross_ok:
                    crossings.append((lo, a_lo, d_lo, u_lo.copy()))
                    prev = (lo, u_lo)
                    s, u = past.s, past.u
                    samples.append(past)
                    h = step
                    continue
            fold_u, fold_s = u_lo, lo
            if abs(_det(u_lo, a_lo, d_lo)) > 1e-12:
                pol = _polish_fold_on_path(u_lo, lo, path)
                if pol is not None and abs(pol[1] - lo) < 1e-6:
                    fold_u, fold_s = pol
            if fold_s > L + 1e-12:
                # singular point lies past the end of the path
                a1, d1 = path.point(L)
                last = attempt(u_lo, lo, L, cur.index)[0]
                if last is not None:
                    samples.append(last)
                    return finish(Termination.REACHED_TARGET)
            fa, fd = path.point(min(fold_s, L))
            if lo > samples[-1].s:
                samples.append(_sample(lo, a_lo, d_lo, u_lo))
            return finish(Termination.FOLD, (fold_s, fa, fd, fold_u))
        h *= 0.5
        if h < STEP_UNDERFLOW:
            if raise_on_failure:
                raise NoConvergence("corrector failed with step below 1e-12", s=s)
            return finish(Termination.STEP_UNDERFLOW)
        if np.any(u < -0.5) or np.any(u > 1.5):
            return finish(Termination.LEFT_BOX)
    return finish(Termination.REACHED_TARGET)


def continue_branch(w, path: ParamPath, step: float = 1e-3, checkpoints=(),
                    raise_on_failure: bool = True) -> Branch:
    """Continue the type-w root from w|_a at (a, 0) along ``path``."""
    w = Word.parse(w)
    a0, d0 = path.start
    if d0 != 0.0:
        raise ValueError("a type-word branch must start on the line d = 0")
    return track(w.values(a0), path, step=step, checkpoints=checkpoints,
                 raise_on_failure=raise_on_failure, word=w)


def _clip_a(a):
    return float(min(max(a, 0.01), 0.99))


def candidate_paths(a, d, offsets=CANDIDATE_OFFSETS):
    """Vertical path from (a, 0) to (a, d), then L-shaped detours through a +- offset."""
    paths = [ParamPath.vertical(a, d)]
    seen = set()
    for off in offsets:
        a2 = _clip_a(a + off)
        if abs(a2 - a) < 1e-12 or a2 in seen:
            continue
        seen.add(a2)
        paths.append(ParamPath([(a, 0.0), (a2, 0.0), (a2, d), (a, d)]))
    return paths


def _lattice_word(u, a, tol=1e-6) -> Optional[Word]:
    letters = []
    for x in u:
        for letter in (Letter.ZERO, Letter.A, Letter.ONE):
            if abs(x - letter.value_at(a)) <= tol:
                letters.append(letter)
                break
        else:
            return None
    return Word(tuple(letters))


def type_of(e, step: float = 1e-3, offsets=CANDIDATE_OFFSETS) -> Optional[Word]:
    """Word of the lattice point reached by continuing ``e`` back to d = 0, or None.

    Tries the vertical descent first, then L-shaped detours that first move a
    at fixed d before descending.
    """
    u, a, d = np.asarray(e.u, dtype=float), e.a, e.d
    if d == 0.0:
        return _lattice_word(u, a)
    for path in candidate_paths(a, d, offsets):
        back = path.reversed()
        br = track(u, back, step=step, raise_on_failure=False)
        if br.reached:
            a_end = back.end[0]
            w = _lattice_word(br.endpoint.u, a_end)
            if w is not None:
                return w
    return None


@lru_cache(maxsize=256)
def _census(n, a, d):
    return eq.enumerate_roots(n, a, d)


def omega_member(w, a, d, step: float = 1e-3, offsets=CANDIDATE_OFFSETS,
                 check_unknown: bool = True) -> Membership:
    """Does (a, d) admit an equilibrium of type w?

    INSIDE when some candidate path carries the branch to (a, d), BOUNDARY
    when a fold lands within 1e-8 of the point, UNKNOWN when every path fails
    although an unnamed root with the matching Morse index exists there.
    """
    w = Word.parse(w)
    if d == 0.0:
        return Membership.INSIDE
    for path in candidate_paths(a, d, offsets):
        ext = path
        if len(path.waypoints) == 2:
            ext = ParamPath.vertical(a, d + 2 * BOUNDARY_TOL)
        br = continue_branch(w, ext, step=step, checkpoints=(path.length,),
                             raise_on_failure=False)
        hit = br.at(path.length)
        if br.termination is Termination.FOLD:
            fs, fa, fd, _ = br.fold_point
            if np.hypot(fa - a, fd - d) <= BOUNDARY_TOL:
                return Membership.BOUNDARY
        if hit is not None:
            return Membership.INSIDE
    if check_unknown:
        want = w.count(Letter.A)
        for root in _census(len(w), float(a), float(d)):
            if root.index == want and type_of(root, step=step, offsets=offsets) is None:
                return Membership.UNKNOWN
    return Membership.OUTSIDE


def equilibrium_of_type(w, a, d, step: float = 1e-3, offsets=CANDIDATE_OFFSETS):
    """u_w(a, d) via the first candidate path that reaches (a, d), or None."""
    w = Word.parse(w)
    if d == 0.0:
        return eq.make_equilibrium(w.values(a), a, d, type_word=w)
    for path in candidate_paths(a, d, offsets):
        br = continue_branch(w, path, step=step, raise_on_failure=False)
        if br.reached:
            e = eq.make_equilibrium(br.endpoint.u, a, d, type_word=w)
            return e
    return None


@dataclass
class PathIndependenceReport:
    word: Word
    a: float
    d: float
    endpoints: list
    max_distance: float
    paths_tried: int

    @property
    def passed(self) -> bool:
        return len(self.endpoints) >= 1 and self.max_distance <= PATH_EQUALITY_TOL


def random_path(a, d, rng, spread=0.05, legs=3):
    """Random piecewise-linear path from (a, 0) to (a, d) with interior waypoints."""
    fr = np.sort(rng.uniform(0.0, 1.0, size=legs - 1))
    pts = [(a, 0.0)]
    for f in fr:
        pts.append((_clip_a(a + rng.uniform(-spread, spread)), f * d))
    pts.append((a, d))
    return ParamPath(pts)


def path_independence_check(w, a, d, trials: int = 8, seed: int = 0, spread=0.05,
                            step: float = 1e-3) -> PathIndependenceReport:
    """Continue w along random admissible paths and compare the endpoints."""
    w = Word.parse(w)
    rng = np.random.default_rng(seed)
    ends = []
    br = continue_branch(w, ParamPath.vertical(a, d), step=step, raise_on_failure=False)
    if br.reached:
        ends.append(br.endpoint.u)
    tried = 1
    for _ in range(trials):
        path = random_path(a, d, rng, spread)
        tried += 1
        br = continue_branch(w, path, step=step, raise_on_failure=False)
        if br.reached:
            ends.append(br.endpoint.u)
    dist = 0.0
    for x, y in itertools.combinations(ends, 2):
        dist = max(dist, float(np.max(np.abs(x - y))))
    return PathIndependenceReport(w, a, d, ends, dist, tried)


@dataclass
class OrderingReport:
    lower: Word
    upper: Word
    min_gap: float
    samples: int
    holds: bool
    gaps: list


def ordering_check(wa, wb, path: ParamPath, n_samples: int = 21,
                   step: float = 1e-3) -> OrderingReport:
    """Check u_{wa} < u_{wb} componentwise at sampled points of a shared path."""
    wa, wb = Word.parse(wa), Word.parse(wb)
    from .words import Order, partial_order
    if partial_order(wa, wb) is not Order.LESS_EQ:
        raise ValueError(f"{wa} is not below {wb}")
    if not (wa.is_binary() or wb.is_binary()):
        raise ValueError("at least one of the words must be binary")
    s_grid = np.linspace(0.0, path.length, n_samples)
    ba = continue_branch(wa, path, step=step, checkpoints=s_grid)
    bb = continue_branch(wb, path, step=step, checkpoints=s_grid)
    if not (ba.reached and bb.reached):
        raise ValueError("path leaves the intersection of the two existence regions")
    gaps = []
    holds = True
    for s in s_grid:
        x, y = ba.at(s, 1e-9), bb.at(s, 1e-9)
        gap = float(np.min(y.u - x.u))
        gaps.append((float(s), x.a, x.d, gap))
        if x.d > 0 and gap <= 0:
            holds = False
    # strictness is only claimed for d > 0; on d = 0 shared letters tie
    pos = [g[3] for g in gaps if g[2] > 0]
    return OrderingReport(wa, wb, min(pos) if pos else float("nan"), len(gaps), holds, gaps)
