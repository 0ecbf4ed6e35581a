"""Existence predictions for travelling waves between stable periodic patterns.

A wave [w- -> w+] between ordered binary patterns exists when both patterns
exist at (a, d) and either

* COND_A: the two words differ at exactly one position, or
* COND_B: no stable pattern strictly between them exists, even on the
  boundary of its existence region.

Pairs are compared after reduction to the shortest common period, so the
constant words 0 and 1 differ at a single position.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import continuation as cont
from . import equilibria as eq
from .continuation import Membership
from .errors import Indeterminate
from .words import (Order, Word, binary_words, hamming, intermediate_stable_words,
                    lyndon_representative, partial_order, periodic_extend, primitive_root, shift)


class Basis(enum.Enum):
    COND_A = "COND_A"
    COND_B = "COND_B"


@dataclass(frozen=True)
class ConnectionClass:
    w_minus: Word
    w_plus: Word
    basis: Basis
    region: str

    @property
    def key(self) -> tuple[str, str]:
        return (str(self.w_minus), str(self.w_plus))

    def to_edge(self) -> dict:
        return {"from": str(self.w_minus), "to": str(self.w_plus), "basis": self.basis.value,
                "region": self.region}


def reduce_pair(wm, wp) -> tuple[Word, Word]:
    """Both words written at the least common multiple of their primitive periods."""
    rm, rp = primitive_root(wm), primitive_root(wp)
    m = math.lcm(len(rm), len(rp))
    return periodic_extend(rm, m), periodic_extend(rp, m)


def class_orbit(c: ConnectionClass, n: Optional[int] = None) -> list[tuple[Word, Word]]:
    """The shifted pairs (T_k w-, T_k w+), written at length n (default: the
    shortest common period), without repeats."""
    wm, wp = reduce_pair(c.w_minus, c.w_plus)
    if n is not None:
        wm, wp = periodic_extend(wm, n), periodic_extend(wp, n)
    out = []
    for k in range(len(wm)):
        pair = (shift(wm, k), shift(wp, k))
        if pair not in out:
            out.append(pair)
    return out


def _canonical(wm: Word, wp: Word) -> tuple[Word, Word]:
    """Orbit representative: w- Lyndon, then the lexicographically smallest w+."""
    best = None
    for k in range(len(wm)):
        a, b = shift(wm, k), shift(wp, k)
        if a != lyndon_representative(wm):
            continue
        if best is None or b.lex_key() < best[1].lex_key():
            best = (a, b)
    a, b = best
    # primitive roots keep the leading letters, so alignment is preserved
    return primitive_root(a), primitive_root(b)


MembershipOracle = Callable[[Word], Membership]


def default_oracle(p: eq.ParameterPoint, step: float = 1e-3) -> MembershipOracle:
    cache: dict = {}

    def member(w: Word) -> Membership:
        # membership is shift invariant, so one query per class suffices
        rep = lyndon_representative(w)
        if rep not in cache:
            cache[rep] = cont.omega_member(rep, p.a, p.d, step=step)
        return cache[rep]

    return member


def predict_connections(n: int, p: eq.ParameterPoint, oracle: Optional[MembershipOracle] = None
                        ) -> list[ConnectionClass]:
    """Connection classes between stable n-periodic patterns predicted at p."""
    if p.d <= 0:
        return []
    member = oracle or default_oracle(p)
    words = binary_words(n)
    verdict = {}
    for w in words:
        m = member(w)
        if m is Membership.UNKNOWN:
            raise Indeterminate(f"membership of {w} at ({p.a}, {p.d}) is unknown", word=str(w))
        verdict[w] = m
    inside = [w for w in words if verdict[w] is Membership.INSIDE]
    found: dict = {}
    for wm in inside:
        for wp in inside:
            if partial_order(wm, wp) is not Order.LESS_EQ:
                continue
            rm, rp = reduce_pair(wm, wp)
            if hamming(rm, rp) == 1:
                basis = Basis.COND_A
                blockers: list = []
            else:
                mids = [periodic_extend(x, n) for x in intermediate_stable_words(rm, rp)]
                if any(verdict[x] in (Membership.INSIDE, Membership.BOUNDARY) for x in mids):
                    continue
                basis = Basis.COND_B
                blockers = sorted({str(lyndon_representative(primitive_root(x))) for x in mids})
            a, b = _canonical(wm, wp)
            key = (str(a), str(b))
            if key in found:
                continue
            region = f"Omega_[{lyndon_representative(a)}] & Omega_[{lyndon_representative(primitive_root(b))}]"
            if blockers:
                region += " minus closure of " + ", ".join(f"Omega_[{x}]" for x in blockers)
            found[key] = ConnectionClass(a, b, basis, region)
    return [found[k] for k in sorted(found, key=lambda k: (len(k[0]), k[0], len(k[1]), k[1]))]


def edges_json(classes: list[ConnectionClass]) -> str:
    return json.dumps([c.to_edge() for c in classes], indent=2)


def edge_set(classes) -> set[tuple[str, str]]:
    return {c.key for c in classes}


@dataclass
class VerificationReport:
    connection: ConnectionClass
    persists: bool
    speed: Optional[float]
    pinned: Optional[bool]
    detail: str = ""

    def to_record(self) -> dict:
        return {**self.connection.to_edge(), "persists": self.persists, "c": self.speed,
                "pinned": self.pinned, "detail": self.detail}


def verify_connection(c: ConnectionClass, p: eq.ParameterPoint, J: int = 400,
                      t_end: float = 2000.0) -> VerificationReport:
    """Integrate a tanh front between the two patterns and check that exactly one
    interface survives to the end of the run."""
    from . import waves
    traj, est = waves.run_front(c.w_minus, c.w_plus, p, J=J, t_end=t_end)
    period = traj.period
    lay = [traj.boundary.left, traj.boundary.right]
    fronts = waves._count_fronts(traj.snapshots[-1], lay, period)
    persists = fronts == 1 and traj.aborted is None
    detail = traj.aborted or f"{fronts} interface(s) in the final state"
    return VerificationReport(c, persists, est.c, est.pinned, detail)
