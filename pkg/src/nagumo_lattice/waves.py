"""Fronts on a finite Nagumo lattice.

Sites are j = 1..J.  The two ghost sites j = 0 and j = J + 1 are held at the
values of the left and right equilibrium patterns, which mimics an infinite
lattice as long as the interfaces stay away from the ends.  A pattern of
period n is laid out so that site j carries component mod(j, n).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import continuation as cont
from . import equilibria as eq
from .errors import BlowUp, MissingEquilibrium, NoInterface, SamePhase
from .words import Word

PIN_TOL = 1e-4
PIN_DISPLACEMENT = 0.5
TRANSIENT_FRACTION = 0.4
DEFAULT_T_END = 2000.0
DEFAULT_J = 400
DEFAULT_WIDTH = 2.0
BLOWUP_BOX = (-0.5, 1.5)
THRESHOLD_TOL = 1e-4
# buffer width of collision runs as a fraction of the lattice
BUFFER_FRACTION = 1.0 / 8.0


def dt_max(d: float) -> float:
    return min(0.1, 0.25 / (1.0 + 4.0 * d))


@dataclass
class LatticeState:
    values: np.ndarray
    time: float = 0.0

    @property
    def J(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FrontSpec:
    left_word: Word
    right_word: Word
    center: float
    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        object.__setattr__(self, "left_word", Word.parse(self.left_word))
        object.__setattr__(self, "right_word", Word.parse(self.right_word))
        if not self.width > 0:
            raise ValueError("front width must be positive")


@dataclass
class Boundary:
    """Pattern values on the full site range 0..J+1, including the ghosts."""

    left: np.ndarray
    right: np.ndarray

    @property
    def ghosts(self) -> tuple[float, float]:
        return float(self.left[0]), float(self.right[-1])


@dataclass
class LatticeTrajectory:
    times: np.ndarray
    snapshots: np.ndarray  # (n_snapshots, J)
    interface_series: list  # (time, position) for single-front runs
    boundary: Boundary
    period: int
    track_class: Optional[int] = None
    aborted: Optional[str] = None
    stride: int = 1

    def state(self, k: int = -1) -> LatticeState:
        return LatticeState(self.snapshots[k].copy(), float(self.times[k]))

    def to_csv(self) -> str:
        J = self.snapshots.shape[1]
        rows = [",".join(["time"] + [f"u_{j}" for j in range(1, J + 1)])]
        for t, v in zip(self.times, self.snapshots):
            rows.append(",".join([repr(float(t))] + [repr(float(x)) for x in v]))
        return "\n".join(rows) + "\n"

    def interface_json(self) -> str:
        return json.dumps({"interface": [[float(t), float(x)] for t, x in self.interface_series],
                           "aborted": self.aborted})


@dataclass
class SpeedEstimate:
    c: float
    pinned: bool
    fit_residual: float
    transient_skipped: float
    displacement: float = 0.0

    def to_record(self) -> dict:
        return {"c": self.c, "pinned": self.pinned, "fit_residual": self.fit_residual,
                "transient_skipped": self.transient_skipped, "displacement": self.displacement}


def pattern(w, p: eq.ParameterPoint, **kw) -> np.ndarray:
    """Components of the equilibrium of type w at p (homogeneous words exactly)."""
    w = Word.parse(w)
    a, d = p.a, p.d
    if len(set(w.letters)) == 1:
        # constant words: branch is the constant root for every d
        return w.values(a)
    e = cont.equilibrium_of_type(w, a, d, **kw)
    if e is None:
        raise MissingEquilibrium(f"no equilibrium of type {w} at (a, d) = ({a}, {d})",
                                 word=str(w), a=a, d=d)
    return e.u


def lay_out(u, J: int) -> np.ndarray:
    """Periodic extension over sites 0..J+1, site j carrying component mod(j, n)."""
    u = np.asarray(u, dtype=float)
    j = np.arange(J + 2)
    return u[(j - 1) % len(u)]


def tanh_front(spec: FrontSpec, p: eq.ParameterPoint, J: int = DEFAULT_J,
               patterns: Optional[tuple] = None) -> tuple[LatticeState, Boundary]:
    """Initial front between the periodic extensions of the two patterns."""
    if patterns is None:
        patterns = (pattern(spec.left_word, p), pattern(spec.right_word, p))
    L = lay_out(patterns[0], J)
    R = lay_out(patterns[1], J)
    j = np.arange(J + 2)
    x = (j - spec.center) / spec.width
    s = 0.5 * (1.0 + np.tanh(x))
    u = L + (R - L) * s
    return LatticeState(u[1:-1].copy(), 0.0), Boundary(L, R)


def _rhs(u, a, d, gl, gr):
    lap = np.empty_like(u)
    lap[1:-1] = u[:-2] - 2.0 * u[1:-1] + u[2:]
    lap[0] = gl - 2.0 * u[0] + u[1]
    lap[-1] = u[-2] - 2.0 * u[-1] + gr
    return d * lap + u * (1.0 - u) * (u - a)


def _track_class(boundary: Boundary, period: int) -> int:
    gaps = [np.abs(boundary.right[r + 1] - boundary.left[r + 1]) for r in range(period)]
    return int(np.argmax(gaps))


def level_crossings(values, boundary: Boundary, r: int, period: int, lo=None, hi=None):
    """Positions (in sites) where residue class r crosses the midpoint between the
    two patterns; ``lo``/``hi`` restrict the search to a site window."""
    J = values.shape[0]
    sites = np.arange(r + 1, J + 1, period)
    if lo is not None:
        sites = sites[(sites >= lo) & (sites <= hi)]
    if sites.size < 2:
        return []
    level = 0.5 * (boundary.left[r + 1] + boundary.right[r + 1])
    y = values[sites - 1] - level
    out = []
    for k in range(len(sites) - 1):
        y0, y1 = y[k], y[k + 1]
        if y0 == 0.0:
            out.append(float(sites[k]))
        elif y0 * y1 < 0:
            out.append(float(sites[k] + (sites[k + 1] - sites[k]) * y0 / (y0 - y1)))
    return out


def _pick(crossings, previous):
    if not crossings:
        return None
    if previous is None:
        return crossings[len(crossings) // 2]
    return min(crossings, key=lambda x: abs(x - previous))


def integrate(s0: LatticeState, p: eq.ParameterPoint, t_end: float, dt: Optional[float] = None,
              boundary: Optional[Boundary] = None, stride: int = 10, period: Optional[int] = None,
              track: bool = True, guard: bool = True) -> LatticeTrajectory:
    """Classical RK4 with pattern-clamped ghost sites.

    Without ``boundary`` the ghosts copy the end values of the initial state.
    Snapshots (and interface samples when ``track``) are stored every
    ``stride`` steps.  With ``guard`` the run stops early, recording a
    diagnostic in ``aborted``, once the interface is within J/16 sites of
    either end.
    """
    a, d = p.a, p.d
    dtm = dt_max(d)
    if dt is None:
        dt = dtm
    if dt > dtm + 1e-15:
        raise ValueError(f"dt = {dt} exceeds the stable maximum {dtm}")
    u = np.array(s0.values, dtype=float)
    J = u.shape[0]
    if boundary is None:
        boundary = Boundary(np.full(J + 2, u[0]), np.full(J + 2, u[-1]))
    gl, gr = boundary.ghosts
    if period is None:
        period = _detect_period(boundary)
    r = _track_class(boundary, period) if track else None
    steps = int(round(t_end / dt))
    t = s0.time
    times, snaps, series = [t], [u.copy()], []
    margin = J / 16.0
    prev = None
    aborted = None

    def sample(t, u):
        nonlocal prev, aborted
        if r is None:
            return
        x = _pick(level_crossings(u, boundary, r, period), prev)
        if x is None:
            return
        prev = x
        series.append((t, x))
        if guard and (x < margin or x > J + 1 - margin):
            aborted = f"interface at site {x:.1f} reached the boundary margin at t = {t:.2f}"

    sample(t, u)
    for k in range(1, steps + 1):
        k1 = _rhs(u, a, d, gl, gr)
        k2 = _rhs(u + 0.5 * dt * k1, a, d, gl, gr)
        k3 = _rhs(u + 0.5 * dt * k2, a, d, gl, gr)
        k4 = _rhs(u + dt * k3, a, d, gl, gr)
        u = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = s0.time + k * dt
        if u.min() < BLOWUP_BOX[0] or u.max() > BLOWUP_BOX[1] or not np.all(np.isfinite(u)):
            raise BlowUp(f"state left {BLOWUP_BOX} at t = {t:.4f}", time=t)
        if k % stride == 0 or k == steps:
            times.append(t)
            snaps.append(u.copy())
            sample(t, u)
            if aborted:
                break
    return LatticeTrajectory(np.array(times), np.array(snaps), series, boundary, period,
                             r, aborted, stride)


def _detect_period(boundary: Boundary, max_period: int = 12) -> int:
    def per(v):
        for q in range(1, max_period + 1):
            if np.allclose(v[q:], v[:-q], atol=1e-12, rtol=0):
                return q
        return 1
    return math.lcm(per(boundary.left), per(boundary.right))


def fit_speed(times, positions, transient=TRANSIENT_FRACTION, pin_tol=PIN_TOL,
              pin_displacement=PIN_DISPLACEMENT) -> SpeedEstimate:
    times = np.asarray(times, dtype=float)
    x = np.asarray(positions, dtype=float)
    t0 = times[0] + transient * (times[-1] - times[0])
    keep = times >= t0
    if keep.sum() < 3:
        raise NoInterface("too few interface samples after the transient window")
    tt, xx = times[keep], x[keep]
    A = np.vstack([tt - tt[0], np.ones_like(tt)]).T
    coef, *_ = np.linalg.lstsq(A, xx, rcond=None)
    c = float(coef[0])
    res = float(np.sqrt(np.mean((A @ coef - xx) ** 2)))
    disp = float(xx.max() - xx.min())
    pinned = abs(c) <= pin_tol and disp <= pin_displacement
    return SpeedEstimate(c, pinned, res, float(t0 - times[0]), disp)


def measure_speed(traj: LatticeTrajectory, transient=TRANSIENT_FRACTION,
                  pin_tol=PIN_TOL) -> SpeedEstimate:
    """Least-squares interface speed over the final 60% of the time window."""
    if len(traj.interface_series) < 3:
        raise NoInterface("the tracked level is never crossed")
    t, x = zip(*traj.interface_series)
    return fit_speed(t, x, transient, pin_tol)


def run_front(left, right, p: eq.ParameterPoint, J: int = DEFAULT_J, t_end: float = DEFAULT_T_END,
              dt: Optional[float] = None, width: float = DEFAULT_WIDTH, stride: int = 10,
              patterns=None) -> tuple[LatticeTrajectory, SpeedEstimate]:
    spec = FrontSpec(left, right, center=J / 2.0, width=width)
    s0, bnd = tanh_front(spec, p, J, patterns)
    traj = integrate(s0, p, t_end, dt, boundary=bnd, stride=stride,
                     period=math.lcm(len(spec.left_word), len(spec.right_word)))
    return traj, measure_speed(traj)


def speed_threshold(front: FrontSpec, a: float, d_lo: float, d_hi: float, tol: float = THRESHOLD_TOL,
                    J: int = DEFAULT_J, t_end: float = DEFAULT_T_END) -> float:
    """Bisect on the pinned predicate between d_lo and d_hi."""

    def pinned(d):
        _, est = run_front(front.left_word, front.right_word, eq.ParameterPoint(a, d), J, t_end,
                           width=front.width)
        return est.pinned

    p_lo, p_hi = pinned(d_lo), pinned(d_hi)
    if p_lo == p_hi:
        raise SamePhase(f"front is {'pinned' if p_lo else 'travelling'} at both ends of "
                        f"[{d_lo}, {d_hi}]", d_lo=d_lo, d_hi=d_hi)
    lo, hi = d_lo, d_hi
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if pinned(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class CollisionOutcome(enum.Enum):
    PINNED_MONO = "PINNED_MONO"
    TRAVELLING_MONO_LEFT = "TRAVELLING_MONO_LEFT"
    TRAVELLING_MONO_RIGHT = "TRAVELLING_MONO_RIGHT"
    NO_COLLISION = "NO_COLLISION"
    OTHER = "OTHER"

    @property
    def travelling(self) -> bool:
        return self in (CollisionOutcome.TRAVELLING_MONO_LEFT, CollisionOutcome.TRAVELLING_MONO_RIGHT)


@dataclass
class CollisionReport:
    outcome: CollisionOutcome
    final_speed: Optional[float]
    buffer_extinction_time: Optional[float]
    left_displacement: float = 0.0
    right_displacement: float = 0.0
    left_reversal: bool = False
    aborted: Optional[str] = None
    trajectory: Optional[LatticeTrajectory] = field(default=None, repr=False)
    interfaces: list = field(default_factory=list, repr=False)  # (time, left_pos, right_pos)

    @property
    def consumed_only_from_right(self) -> bool:
        return abs(self.left_displacement) <= PIN_DISPLACEMENT + 1.0 and self.right_displacement < -1.0

    def to_record(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "travelling": self.outcome.travelling,
            "final_speed": self.final_speed,
            "buffer_extinction_time": self.buffer_extinction_time,
            "left_displacement": self.left_displacement,
            "right_displacement": self.right_displacement,
            "consumed_only_from_right": self.consumed_only_from_right,
            "left_reversal": self.left_reversal,
            "aborted": self.aborted,
        }


def label_sites(values, layouts: Sequence[np.ndarray], period: int) -> np.ndarray:
    """Index of the pattern closest to the state on each site's window of ``period``
    sites; runs shorter than one period are absorbed into the preceding run."""
    J = values.shape[0]
    dist = []
    kernel = np.ones(period)
    for P in layouts:
        err = np.abs(values - P[1:-1])
        dist.append(np.convolve(err, kernel, mode="same"))
    lab = np.argmin(np.array(dist), axis=0)
    # absorb short runs
    runs = _runs(lab)
    out = lab.copy()
    for k, (s, e, v) in enumerate(runs):
        if e - s < period and k > 0:
            out[s:e] = out[s - 1]
    return out


def _runs(lab):
    runs = []
    s = 0
    for j in range(1, len(lab) + 1):
        if j == len(lab) or lab[j] != lab[s]:
            runs.append((s, j, int(lab[s])))
            s = j
    return runs


def _interface_between(values, lp: Boundary, period, guess):
    r = _track_class(lp, period)
    xs = level_crossings(values, lp, r, period, guess - 3 * period, guess + 3 * period)
    return _pick(xs, guess) if xs else float(guess)


def collide(left, mid, right, p: eq.ParameterPoint, J: int = DEFAULT_J, t_end: float = DEFAULT_T_END,
            dt: Optional[float] = None, width: float = DEFAULT_WIDTH, stride: int = 10,
            patterns=None, buffer: Optional[float] = None) -> CollisionReport:
    """Two fronts centred on the lattice with ``buffer`` sites of the ``mid``
    pattern between them (default J * BUFFER_FRACTION)."""
    words = [Word.parse(x) for x in (left, mid, right)]
    if patterns is None:
        patterns = [pattern(w, p) for w in words]
    period = math.lcm(*(len(w) for w in words))
    if buffer is None:
        buffer = J * BUFFER_FRACTION
    lay = [lay_out(u, J) for u in patterns]
    j = np.arange(J + 2)
    x1, x2 = (J - buffer) / 2.0, (J + buffer) / 2.0
    s1 = 0.5 * (1.0 + np.tanh((j - x1) / width))
    s2 = 0.5 * (1.0 + np.tanh((j - x2) / width))
    u0 = lay[0] + (lay[1] - lay[0]) * s1 + (lay[2] - lay[1]) * s2
    outer = Boundary(lay[0], lay[2])
    traj = integrate(LatticeState(u0[1:-1].copy()), p, t_end, dt, boundary=outer, stride=stride,
                     period=period, track=False)
    lm = Boundary(lay[0], lay[1])
    mr = Boundary(lay[1], lay[2])
    history = []
    extinction = None
    mono_series = []
    aborted = None
    margin = J / 16.0
    for t, v in zip(traj.times, traj.snapshots):
        lab = label_sites(v, lay, period)
        has_mid = np.any(lab == 1)
        if has_mid and extinction is None:
            mids = np.flatnonzero(lab == 1)
            xl = _interface_between(v, lm, period, mids[0] + 0.5)
            xr = _interface_between(v, mr, period, mids[-1] + 1.5)
            history.append((float(t), xl, xr))
            if min(xl, xr) < margin or max(xl, xr) > J + 1 - margin:
                aborted = f"interface reached the boundary margin at t = {t:.2f}"
                break
        else:
            if extinction is None:
                extinction = float(t)
            xs = level_crossings(v, outer, _track_class(outer, period), period)
            prev = mono_series[-1][1] if mono_series else None
            x = _pick(xs, prev)
            if x is not None:
                mono_series.append((float(t), x))
                if x < margin or x > J + 1 - margin:
                    aborted = f"interface reached the boundary margin at t = {t:.2f}"
                    break
    left_disp = right_disp = 0.0
    reversal = False
    if history:
        xl = np.array([h[1] for h in history])
        xr = np.array([h[2] for h in history])
        left_disp = float(xl[-1] - xl[0])
        right_disp = float(xr[-1] - xr[0])
        # the left interface continues as the merged front after extinction;
        # a reversal needs more than one period of travel each way
        path = np.concatenate([xl, [x for _, x in mono_series]])
        i_max = int(np.argmax(path))
        reversal = bool(path[i_max] - path[0] > period and path[i_max] - path[-1] > period)
    final_speed = None
    if extinction is None:
        outcome = CollisionOutcome.NO_COLLISION
    else:
        try:
            t_m, x_m = zip(*mono_series)
            est = fit_speed(t_m, x_m)
            final_speed = est.c
            n_fronts = _count_fronts(traj.snapshots[-1], lay, period)
            if n_fronts != 1:
                outcome = CollisionOutcome.OTHER
            elif est.pinned:
                outcome = CollisionOutcome.PINNED_MONO
            elif est.c < 0:
                outcome = CollisionOutcome.TRAVELLING_MONO_LEFT
            else:
                outcome = CollisionOutcome.TRAVELLING_MONO_RIGHT
        except (ValueError, NoInterface):
            outcome = CollisionOutcome.OTHER
    return CollisionReport(outcome, final_speed, extinction, left_disp, right_disp, reversal,
                           aborted or traj.aborted, traj, history)


def _count_fronts(v, lay, period) -> int:
    lab = label_sites(v, lay, period)
    return len(_runs(lab)) - 1
