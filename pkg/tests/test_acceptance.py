"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
terminal summary so they show up in captured logs.
"""

import math

import pytest

from nagumo_lattice import acceptance as A

LINES = {}


def _report(res):
    LINES[res.number] = res.line()
    print(res.line())
    return res


def test_criterion_1_exact_threshold():
    res = _report(A.exact_threshold())
    assert res.details["max_error"] <= 1e-8
    assert res.seconds < 10
    assert res.ok, res.details


def test_criterion_2_cusp_and_fold():
    res = _report(A.cusp_fold())
    (ca, cd), = res.details["cusp"]
    (fa, fd), = res.details["fold"]
    assert math.hypot(ca - 0.4013889, cd - 0.05668) <= 2e-4
    assert math.hypot(fa - 0.401476, fd - 0.056275) <= 2e-4
    assert res.seconds < 60
    assert res.ok


def test_criterion_3_root_census():
    res = _report(A.census())
    assert res.details == {"total": 27, "stable": 6, "unstable": 18, "homogeneous": 3}
    assert res.seconds < 5
    assert res.ok


def test_criterion_4_expansion_residuals():
    res = _report(A.expansions())
    for w in A.EXPANSION_WORDS:
        d = res.details[w]
        assert d["order"] == (4 if w == "0001" else 5)
        assert d["fitted_constant"] <= d["bound"], (w, d)
        print(f"  fitted constant for {w}: {d['fitted_constant']:.4g} (k = {d['order']})")
    assert res.details["gamma_0011_minus_twice_gamma_01"] <= 1e-8
    assert res.seconds < 120
    assert res.ok


def test_criterion_5_collisions():
    res = _report(A.collisions())
    for key, rec in res.details.items():
        print(f"  {key}: {rec['outcome']} ({rec['seconds']:.1f} s)")
        assert rec["seconds"] < 120
    assert res.ok, res.details


def test_criterion_6_speed_threshold():
    res = _report(A.speed_threshold())
    assert 0.050 < res.details["threshold"] < 0.054
    assert res.seconds < 600
    assert res.ok


def test_criterion_7_property_suites():
    res = _report(A.properties())
    det = res.details
    assert det["jacobian_fd_error"] <= 1e-6
    assert det["symmetry_error"] <= 1e-14
    assert det["root_set_equivariant"]
    assert det["comparison_principle"]
    assert len(det["ordering_min_gaps"]) == 10 and min(det["ordering_min_gaps"]) > 0
    assert max(det["dt_halving_speed_change"]) <= 1e-5
    assert res.ok


def test_criterion_8_connection_diagrams():
    res = _report(A.diagrams())
    for key, d in res.details.items():
        assert d["match"], (key, d)
    assert res.seconds < 300
    assert res.ok


@pytest.fixture(scope="session", autouse=True)
def _acceptance_lines():
    yield LINES
