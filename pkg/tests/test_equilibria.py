from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nagumo_lattice import continuation as cont
from nagumo_lattice import equilibria as eq
from nagumo_lattice.errors import NoConvergence
from nagumo_lattice.words import Word, all_words, reflect, shift

unit = st.floats(0.0, 1.0, allow_nan=False)
a_open = st.floats(0.01, 0.99)
d_pos = st.floats(0.0, 0.3)
vec3 = st.lists(st.floats(-0.2, 1.2), min_size=3, max_size=3).map(np.array)


def test_cubic_examples():
    for u in (0.0, 1.0, 0.3):
        assert eq.cubic(u, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert eq.cubic(0.5, 0.5) == 0.0
    assert eq.cubic(0.5, 0.25) == pytest.approx(0.0625, abs=1e-15)


@given(a_open)
def test_cubic_deriv_at_roots(a):
    assert eq.cubic_deriv(0.0, a) == pytest.approx(-a)
    assert eq.cubic_deriv(1.0, a) == pytest.approx(a - 1)
    assert eq.cubic_deriv(a, a) == pytest.approx(a * (1 - a))


def test_residual_exact_rational_oracle():
    # rows evaluated by hand with exact rationals at a = 1/2, d = 1/25
    expected = [Fraction(-3, 125), Fraction(-6, 125), Fraction(-27, 500)]
    got = eq.residual(np.array([0.1, 0.2, 0.3]), 0.5, 0.04)
    np.testing.assert_allclose(got, [float(x) for x in expected], rtol=0, atol=1e-15)


def test_residual_n2_doubles_the_coupling():
    u = np.array([0.2, 0.7])
    got = eq.residual(u, 0.4, 0.05)
    want = [2 * 0.05 * (0.7 - 0.2) + eq.cubic(0.2, 0.4), 2 * 0.05 * (0.2 - 0.7) + eq.cubic(0.7, 0.4)]
    np.testing.assert_allclose(got, want, atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lattice_points_are_roots_at_d0(n):
    a = 0.37
    for w in all_words(n):
        assert np.max(np.abs(eq.residual(w.values(a), a, 0.0))) == 0.0
        J = eq.jacobian(w.values(a), a, 0.0)
        assert np.count_nonzero(J - np.diag(np.diag(J))) == 0
        assert set(np.round(np.diag(J), 12)) <= {round(-a, 12), round(a * (1 - a), 12),
                                                  round(a - 1, 12)}


@given(a_open, d_pos, st.integers(2, 7))
def test_homogeneous_root_persists(a, d, n):
    assert np.max(np.abs(eq.residual(np.full(n, a), a, d))) <= 1e-15
    e = eq.newton_solve(np.full(n, a), a, d)
    assert np.array_equal(e.u, np.full(n, a)) and e.iterations == 0


@given(vec3, a_open, d_pos)
def test_jacobian_matches_finite_differences(u, a, d):
    h = 1e-6
    J = eq.jacobian(u, a, d)
    fd = np.column_stack([(eq.residual(u + h * e, a, d) - eq.residual(u - h * e, a, d)) / (2 * h)
                          for e in np.eye(3)])
    assert np.max(np.abs(J - fd)) <= 1e-6


@given(vec3, a_open, d_pos)
def test_symmetry_identity(u, a, d):
    lhs = eq.residual(1 - u, a, d)
    rhs = -eq.residual(u, 1 - a, d)
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


@given(vec3, a_open, d_pos, st.integers(0, 2))
def test_shift_and_reflection_equivariance(u, a, d, k):
    G = eq.residual(u, a, d)
    np.testing.assert_allclose(eq.residual(np.roll(u, -k), a, d), np.roll(G, -k), atol=1e-15)
    R = lambda v: v[(-np.arange(3)) % 3]
    np.testing.assert_allclose(eq.residual(R(u), a, d), R(G), atol=1e-15)


def test_newton_from_lattice_point_matches_continuation():
    e = eq.newton_solve(Word.parse("011").values(0.3), 0.3, 0.005)
    assert e.residual_norm <= 1e-12
    br = cont.continue_branch("011", cont.ParamPath.vertical(0.3, 0.005), step=1e-4)
    assert np.max(np.abs(br.endpoint.u - e.u)) <= 1e-9
    assert e.u[0] < 0.1 and min(e.u[1:]) > 0.9


def test_newton_far_guess_fails():
    with pytest.raises(NoConvergence):
        eq.newton_solve(np.full(3, 10.0), 0.3, 0.01)
    with pytest.raises(NoConvergence):
        eq.newton_solve(np.full(3, 10.0), 0.3, 0.01, box=None, max_iter=2)


@given(a_open, d_pos, st.integers(2, 6))
def test_homogeneous_zero_is_stable(a, d, n):
    e = eq.make_equilibrium(np.zeros(n), a, d)
    assert e.stability is eq.Stability.STABLE
    k = np.arange(n)
    want = np.sort(-a + d * (2 * np.cos(2 * np.pi * k / n) - 2))
    np.testing.assert_allclose(np.sort(e.eigenvalues), want, atol=1e-12)
    np.testing.assert_allclose(np.sort(eq.circulant_eigenvalues(0.0, a, d, n)), want, atol=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.01, 0.99))
def test_homogeneous_a_unstable_below_threshold(a, frac):
    d = frac * a * (1 - a) / 3
    assert eq.make_equilibrium(np.full(3, a), a, d).stability is eq.Stability.UNSTABLE


def test_homogeneous_a_on_threshold_is_degenerate():
    # the two eigenvalues of the k = 1, 2 modes vanish; the k = 0 mode stays at a(1 - a)
    e = eq.make_equilibrium(np.full(3, 0.5), 0.5, 1 / 12)
    ev = np.sort(e.eigenvalues)
    assert abs(ev[0]) < 1e-15 and abs(ev[1]) < 1e-15
    assert ev[2] == pytest.approx(0.25)
    assert abs(e.det) < 1e-15
    assert e.stability is eq.Stability.MARGINAL


def test_census_n3_small_d():
    roots = eq.enumerate_roots(3, 0.5, 0.01)
    assert len(roots) == 27
    homog = [r for r in roots if r.is_homogeneous()]
    rest = [r for r in roots if not r.is_homogeneous()]
    assert len(homog) == 3
    assert sum(r.stability is eq.Stability.STABLE for r in rest) == 6
    assert sum(r.stability is eq.Stability.UNSTABLE for r in rest) == 18
    assert all(r.residual_norm <= 1e-12 for r in roots)


def test_census_n3_large_d_only_homogeneous():
    roots = eq.enumerate_roots(3, 0.5, 0.2)
    assert len(roots) == 3 and all(r.is_homogeneous() for r in roots)


@pytest.mark.parametrize("a,d", [(0.3, 0.01), (0.45, 0.03), (0.6, 0.002)])
def test_root_set_is_shift_and_reflection_closed(a, d):
    U = np.array([r.u for r in eq.enumerate_roots(3, a, d)])

    def contains(v):
        return np.min(np.max(np.abs(U - v), axis=1)) < 1e-8

    for u in U:
        assert contains(np.roll(u, 1))
        assert contains(u[(-np.arange(3)) % 3])


def test_invalid_parameter_point():
    with pytest.raises(ValueError):
        eq.ParameterPoint(1.5, 0.1)
    with pytest.raises(ValueError):
        eq.ParameterPoint(0.3, -0.1)


def test_records_are_plain_json_types():
    rec = eq.enumerate_roots(2, 0.4, 0.01)[0].to_record()
    assert set(rec) >= {"u", "a", "d", "eigenvalues", "stability"}
    assert isinstance(rec["u"][0], float) and isinstance(rec["stability"], str)
