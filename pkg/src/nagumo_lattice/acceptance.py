"""Acceptance checks shared by the test suite and the ``verify`` subcommand.

Each check returns a ``CriterionResult``; runtimes are measured wall-clock and
count against the stated limit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import bifurcation as bf
from . import connections as conn
from . import continuation as cont
from . import equilibria as eq
from . import waves
from .words import Word

CUSP_REF = (0.4013889, 0.05668)
FOLD_REF = (0.401476, 0.056275)
CUSP_TOL = 2e-4

EXPANSION_WORDS = ("011", "001", "01", "0011", "0001", "0111")
EXPANSION_SAMPLES = (0.05, 0.1, 0.15, 0.2)

COLLISIONS = (
    (("0", "001", "1"), (0.404, 0.054), "PINNED_MONO", False),
    (("0", "001", "1"), (0.404, 0.05), "PINNED_MONO", True),
    (("0", "0001", "1"), (0.378, 0.058), "TRAVELLING_MONO", False),
    (("0", "0001", "1"), (0.37, 0.0625), "TRAVELLING_MONO", False),
)

# representative points and the full expected edge sets of the connection diagrams
DIAGRAM_POINTS = {
    3: [
        ((0.45, 0.01), {("0", "001"), ("001", "011"), ("001", "101"), ("011", "1"), ("0", "1")}),
        ((0.6, 0.04), {("0", "011"), ("011", "1"), ("0", "1")}),
        ((0.4, 0.04), {("0", "001"), ("001", "1"), ("0", "1")}),
    ],
    4: [
        ((0.45, 0.005), {("0", "0001"), ("0001", "01"), ("0001", "1001"), ("0001", "0011"),
                         ("0011", "0111"), ("0011", "1011"), ("0111", "1"), ("01", "0111"),
                         ("0", "01"), ("01", "1"), ("0", "1")}),
        ((0.7, 0.018), {("0", "0011"), ("0011", "0111"), ("0011", "1011"), ("0111", "1"),
                        ("0", "1")}),
        ((0.6, 0.048), {("0", "0111"), ("0111", "1"), ("0", "1")}),
        ((0.3, 0.018), {("0", "0001"), ("0001", "0011"), ("0001", "1001"), ("0011", "1"),
                        ("0", "1")}),
        ((0.4, 0.048), {("0", "0001"), ("0001", "1"), ("0", "1")}),
    ],
}
DASHED = {3: {("0", "011"), ("001", "1")},
          4: {("0", "0011"), ("0", "0111"), ("0011", "1"), ("0001", "1")}}
FORBIDDEN = {4: {("0001", "0111")}}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed and self.seconds < self.limit

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.seconds:.1f} s, limit {self.limit:.0f} s)"

    def to_record(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.ok,
                "seconds": self.seconds, "limit": self.limit, "details": self.details}


def _timed(fn: Callable[[], tuple[bool, dict]]) -> tuple[bool, dict, float]:
    t0 = time.perf_counter()
    ok, details = fn()
    return ok, details, time.perf_counter() - t0


def exact_threshold() -> CriterionResult:
    def run():
        curve = bf.homogeneous_gamma(3, a_range=(0.04, 0.96))
        a, d = curve.a, curve.d
        sel = (a >= 0.05) & (a <= 0.95)
        err = float(np.max(np.abs(d[sel] - a[sel] * (1 - a[sel]) / 3)))
        covered = a.min() <= 0.05 and a.max() >= 0.95
        return err <= 1e-8 and covered, {"max_error": err, "samples": int(sel.sum())}
    ok, det, t = _timed(run)
    return CriterionResult(1, "homogeneous threshold d = a(1-a)/3 for n = 3", ok, t, 10, det)


def cusp_fold() -> CriterionResult:
    def run():
        curve = bf.trace_word_gamma("001", 0.41)
        pts = bf.cusp_fold_points(curve)
        cusps = [p for p in pts if p[2] is bf.PointKind.CUSP]
        folds = [p for p in pts if p[2] is bf.PointKind.FOLD]

        def near(ps, ref):
            return [p for p in ps if np.hypot(p[0] - ref[0], p[1] - ref[1]) <= CUSP_TOL]
        c, f = near(cusps, CUSP_REF), near(folds, FOLD_REF)
        det = {"cusp": [p[:2] for p in cusps], "fold": [p[:2] for p in folds]}
        return bool(c and f), det
    ok, det, t = _timed(run)
    return CriterionResult(2, "cusp and fold of the 001 fold curve, n = 3", ok, t, 60, det)


def census() -> CriterionResult:
    def run():
        roots = eq.enumerate_roots(3, 0.5, 0.01)
        homog = [r for r in roots if r.is_homogeneous()]
        rest = [r for r in roots if not r.is_homogeneous()]
        st = sum(r.stability is eq.Stability.STABLE for r in rest)
        un = sum(r.stability is eq.Stability.UNSTABLE for r in rest)
        det = {"total": len(roots), "stable": st, "unstable": un, "homogeneous": len(homog)}
        return (len(roots), st, un, len(homog)) == (27, 6, 18, 3), det
    ok, det, t = _timed(run)
    return CriterionResult(3, "root census at (0.5, 0.01), n = 3", ok, t, 5, det)


def expansions() -> CriterionResult:
    def run():
        det = {}
        ok = True
        for w in EXPANSION_WORDS:
            rep = asy.validate_against_trace(w, EXPANSION_SAMPLES)
            det[w] = {"order": rep.order, "fitted_constant": rep.fitted_constant,
                      "bound": rep.bound, "normalized": rep.normalized()}
            ok &= rep.passed
        grid = [0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.55, 0.6, 0.7, 0.8, 0.9]
        diff = max(abs(bf.fold_d("0011", a) - 2 * bf.fold_d("01", a)) for a in grid)
        det["gamma_0011_minus_twice_gamma_01"] = diff
        return ok and diff <= 1e-8, det
    ok, det, t = _timed(run)
    return CriterionResult(4, "expansion residuals and the 0011 = 2 x 01 identity", ok, t, 120, det)


def collisions(dt_factor: float = 1.0) -> CriterionResult:
    def run():
        det = {}
        ok = True
        for words, p, want, right_only in COLLISIONS:
            pt = eq.ParameterPoint(*p)
            t0 = time.perf_counter()
            rep = waves.collide(*words, pt, J=400, t_end=2000.0, dt=waves.dt_max(pt.d) * dt_factor)
            secs = time.perf_counter() - t0
            got = rep.outcome.value
            match = got.startswith(want) and secs < 120
            if right_only:
                match &= rep.consumed_only_from_right
            ok &= match
            det[f"{'-'.join(words)} at {p}"] = {**rep.to_record(), "seconds": secs}
        return ok, det
    ok, det, t = _timed(run)
    return CriterionResult(5, "collision outcomes at J = 400, tEnd = 2000", ok, t, 480, det)


def speed_threshold() -> CriterionResult:
    def run():
        th = waves.speed_threshold(waves.FrontSpec("0", "001", 200.0), 0.404, 0.050, 0.054)
        return 0.050 < th < 0.054, {"threshold": th}
    ok, det, t = _timed(run)
    return CriterionResult(6, "speed threshold of [0 -> 001] at a = 0.404", ok, t, 600, det)


def _random_points(rng, k, d_max=0.05):
    return [(float(rng.uniform(0.05, 0.95)), float(rng.uniform(0.0, d_max))) for _ in range(k)]


def properties(seed: int = 0) -> CriterionResult:
    def run():
        rng = np.random.default_rng(seed)
        det = {}
        # Jacobian against centred differences
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 7))
            u = rng.uniform(-0.2, 1.2, n)
            a, d = rng.uniform(0, 1), rng.uniform(0, 0.3)
            J = eq.jacobian(u, a, d)
            h = 1e-6
            fd = np.column_stack([(eq.residual(u + h * e, a, d) - eq.residual(u - h * e, a, d)) / (2 * h)
                                  for e in np.eye(n)])
            worst = max(worst, float(np.max(np.abs(J - fd))))
        det["jacobian_fd_error"] = worst
        ok = worst <= 1e-6
        # G(1 - u; a, d) = -G(u; 1 - a, d)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 7))
            u = rng.uniform(0, 1, n)
            a, d = rng.uniform(0, 1), rng.uniform(0, 0.3)
            worst = max(worst, float(np.max(np.abs(eq.residual(1 - u, a, d) + eq.residual(u, 1 - a, d)))))
        det["symmetry_error"] = worst
        ok &= worst <= 1e-14
        # shift and reflection equivariance of the root set
        eq_ok = True
        for a, d in _random_points(rng, 3, 0.03):
            roots = np.array([r.u for r in eq.enumerate_roots(3, a, d)])
            key = {tuple(np.round(r, 7)) for r in roots}
            for img in (np.roll(roots, 1, axis=1), roots[:, ::-1]):
                eq_ok &= {tuple(np.round(r, 7)) for r in img} == key
        det["root_set_equivariant"] = eq_ok
        ok &= eq_ok
        # comparison principle on 20 ordered pairs of initial states
        cmp_ok = True
        for _ in range(20):
            J = 60
            lo = rng.uniform(0, 1, J)
            hi = np.minimum(lo + rng.uniform(0, 0.5, J), 1.0)
            p = eq.ParameterPoint(float(rng.uniform(0.1, 0.9)), float(rng.uniform(0.01, 0.2)))
            bnd = waves.Boundary(np.zeros(J + 2), np.ones(J + 2))
            tl = waves.integrate(waves.LatticeState(lo), p, 20.0, boundary=bnd, track=False, stride=5)
            th = waves.integrate(waves.LatticeState(hi), p, 20.0, boundary=bnd, track=False, stride=5)
            cmp_ok &= bool(np.all(th.snapshots - tl.snapshots >= -1e-12))
        det["comparison_principle"] = cmp_ok
        ok &= cmp_ok
        # strict ordering of two branches along random shared paths
        gaps = []
        pairs = [("0001", "0011"), ("001", "011"), ("0", "001"), ("0011", "0111"), ("01", "0111")]
        for k in range(10):
            wa, wb = pairs[k % len(pairs)]
            n = max(len(wa), len(wb))
            wa, wb = Word.parse(wa * (n // len(wa))), Word.parse(wb * (n // len(wb)))
            a, d = float(rng.uniform(0.2, 0.8)), float(rng.uniform(0.001, 0.004))
            path = cont.random_path(a, d, rng, spread=0.05)
            rep = cont.ordering_check(wa, wb, path)
            gaps.append(rep.min_gap if rep.holds else -1.0)
        det["ordering_min_gaps"] = gaps
        ok &= all(g > 0 for g in gaps)
        # dt halving on the collision runs
        diffs = []
        for words, p, _, _ in COLLISIONS:
            pt = eq.ParameterPoint(*p)
            r1 = waves.collide(*words, pt)
            r2 = waves.collide(*words, pt, dt=waves.dt_max(pt.d) / 2)
            if r1.final_speed is None or r2.final_speed is None:
                diffs.append(float("inf"))
            else:
                diffs.append(abs(r1.final_speed - r2.final_speed))
        det["dt_halving_speed_change"] = diffs
        ok &= max(diffs) <= 1e-5
        return bool(ok), det
    ok, det, t = _timed(run)
    return CriterionResult(7, "property suites", ok, t, 600, det)


def diagrams() -> CriterionResult:
    def run():
        det = {}
        ok = True
        for n, cases in DIAGRAM_POINTS.items():
            for p, want in cases:
                got = conn.edge_set(conn.predict_connections(n, eq.ParameterPoint(*p)))
                match = got == want and not (got & FORBIDDEN.get(n, set()))
                ok &= match
                det[f"n={n} at {p}"] = {"match": match, "missing": sorted(want - got),
                                        "extra": sorted(got - want)}
        return ok, det
    ok, det, t = _timed(run)
    return CriterionResult(8, "connection diagrams for n = 3 and n = 4", ok, t, 300, det)


ALL = (exact_threshold, cusp_fold, census, expansions, collisions, speed_threshold, properties, diagrams)


def run_all(selected=None) -> list[CriterionResult]:
    out = []
    for k, fn in enumerate(ALL, start=1):
        if selected and k not in selected:
            continue
        out.append(fn())
    return out
