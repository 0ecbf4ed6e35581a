import json

import numpy as np
import pytest

from nagumo_lattice import connections as conn
from nagumo_lattice import equilibria as eq
from nagumo_lattice import waves
from nagumo_lattice.connections import Basis, ConnectionClass
from nagumo_lattice.continuation import Membership
from nagumo_lattice.errors import Indeterminate
from nagumo_lattice.words import (Order, Word, invert01, lyndon_representative, partial_order,
                                  periodic_extend, primitive_root)


def W(s):
    return Word.parse(s)


def oracle_from(inside):
    inside = {lyndon_representative(W(w)) for w in inside}

    def member(w):
        key = lyndon_representative(primitive_root(w))
        return Membership.INSIDE if key in inside else Membership.OUTSIDE
    return member


LOW_D_N3 = {("0", "001"), ("001", "011"), ("001", "101"), ("011", "1"), ("0", "1")}


def test_orbit_examples():
    c = ConnectionClass(W("001"), W("011"), Basis.COND_A, "")
    assert set(conn.class_orbit(c)) == {(W("001"), W("011")), (W("100"), W("101")),
                                        (W("010"), W("110"))}
    c2 = ConnectionClass(W("001"), W("101"), Basis.COND_A, "")
    assert set(conn.class_orbit(c2)) == {(W("001"), W("101")), (W("100"), W("110")),
                                         (W("010"), W("011"))}
    assert set(conn.class_orbit(c)) != set(conn.class_orbit(c2))
    assert conn.class_orbit(ConnectionClass(W("0"), W("1"), Basis.COND_A, "")) == [(W("0"), W("1"))]
    assert len(conn.class_orbit(ConnectionClass(W("0"), W("1"), Basis.COND_A, ""), n=4)) == 1


def test_reduce_pair():
    assert conn.reduce_pair("000", "111") == (W("0"), W("1"))
    assert conn.reduce_pair("0000", "0101") == (W("00"), W("01"))
    assert conn.reduce_pair("0001", "0011") == (W("0001"), W("0011"))


def test_low_d_prediction_with_all_words_present():
    got = conn.predict_connections(3, eq.ParameterPoint(0.45, 0.01),
                                   oracle=oracle_from(["0", "1", "001", "011"]))
    assert conn.edge_set(got) == LOW_D_N3
    assert all(c.basis is Basis.COND_A for c in got)


def test_dashed_edge_when_001_is_absent():
    got = conn.predict_connections(3, eq.ParameterPoint(0.6, 0.04),
                                   oracle=oracle_from(["0", "1", "011"]))
    by_key = {c.key: c for c in got}
    assert ("0", "011") in by_key and by_key[("0", "011")].basis is Basis.COND_B
    assert "minus closure of Omega_[001]" in by_key[("0", "011")].region


def test_boundary_verdict_blocks_cond_b():
    base = oracle_from(["0", "1", "011"])

    def member(w):
        if lyndon_representative(w) == W("001"):
            return Membership.BOUNDARY
        return base(w)
    got = conn.edge_set(conn.predict_connections(3, eq.ParameterPoint(0.6, 0.04), oracle=member))
    assert ("0", "011") not in got


def test_unknown_membership_is_indeterminate():
    with pytest.raises(Indeterminate):
        conn.predict_connections(3, eq.ParameterPoint(0.5, 0.01),
                                 oracle=lambda w: Membership.UNKNOWN)


def test_no_connections_at_d0():
    assert conn.predict_connections(3, eq.ParameterPoint(0.5, 0.0)) == []


def test_structural_invariants_with_synthetic_oracle():
    got = conn.predict_connections(4, eq.ParameterPoint(0.45, 0.005),
                                   oracle=oracle_from(["0", "1", "0001", "0011", "0111", "01"]))
    for c in got:
        wm, wp = conn.reduce_pair(c.w_minus, c.w_plus)
        assert wm != wp
        assert partial_order(wm, wp) is Order.LESS_EQ
        assert lyndon_representative(c.w_minus) == c.w_minus
        assert c.w_minus.is_binary() and c.w_plus.is_binary()
    assert ("0001", "0111") not in conn.edge_set(got)


def _mirror(classes):
    out = set()
    for c in classes:
        wm, wp = conn.reduce_pair(c.w_minus, c.w_plus)
        a, b = conn._canonical(invert01(wp), invert01(wm))
        out.add((str(a), str(b)))
    return out


@pytest.fixture(scope="module")
def pair_04_06():
    lo = conn.predict_connections(3, eq.ParameterPoint(0.4, 0.04))
    hi = conn.predict_connections(3, eq.ParameterPoint(0.6, 0.04))
    return lo, hi


def test_swap_symmetry_of_predictions(pair_04_06):
    lo, hi = pair_04_06
    assert _mirror(lo) == conn.edge_set(hi)
    assert _mirror(hi) == conn.edge_set(lo)


def test_cond_b_rechecked_against_root_census(pair_04_06):
    lo, _ = pair_04_06
    p = eq.ParameterPoint(0.4, 0.04)
    roots = [r for r in eq.enumerate_roots(3, p.a, p.d) if r.stability is eq.Stability.STABLE]
    for c in lo:
        if c.basis is not Basis.COND_B:
            continue
        wm, wp = (periodic_extend(w, 3) for w in (c.w_minus, c.w_plus))
        um, up = waves.pattern(wm, p), waves.pattern(wp, p)
        inside = [r for r in roots
                  if np.all(r.u >= um - 1e-9) and np.all(r.u <= up + 1e-9)
                  and not (np.allclose(r.u, um) or np.allclose(r.u, up))]
        assert inside == []


def test_edges_json_shape():
    got = conn.predict_connections(3, eq.ParameterPoint(0.45, 0.01),
                                   oracle=oracle_from(["0", "1", "001", "011"]))
    edges = json.loads(conn.edges_json(got))
    assert {tuple(sorted(e)) for e in edges} == {("basis", "from", "region", "to")}


@pytest.mark.parametrize("wm,wp,a,d,moving", [
    ("0", "001", 0.404, 0.054, True),
    ("001", "011", 0.401, 0.02, False),
    ("0", "1", 0.5, 0.05, False),
])
def test_verify_connection_examples(wm, wp, a, d, moving):
    c = ConnectionClass(W(wm), W(wp), Basis.COND_A, "")
    rep = conn.verify_connection(c, eq.ParameterPoint(a, d))
    assert rep.persists
    assert rep.pinned is (not moving)
    if moving:
        assert rep.speed > 0
