from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nagumo_lattice import asymptotics as asy
from nagumo_lattice import bifurcation as bf
from nagumo_lattice.errors import UnsupportedWord
from nagumo_lattice.words import Word, shift, periodic_extend

small_a = st.floats(0.0, 0.3)
SAMPLES = [0.05, 0.1, 0.15, 0.2]


def test_homogeneous_threshold_value():
    assert asy.threshold_expansion("aaa", 0.5) == pytest.approx(1 / 12, abs=1e-16)
    assert asy.homogeneous_threshold(0.3, 4) == pytest.approx(0.3 * 0.7 / 4)
    with pytest.raises(UnsupportedWord):
        asy.homogeneous_threshold(0.3, 1)


def test_0011_is_twice_01_coefficientwise():
    a, b = asy.RECORDS["0011"].d_of_a, asy.RECORDS["01"].d_of_a
    assert len(a) == len(b)
    assert all(x == 2 * y for x, y in zip(a, b))


def test_coefficients_are_exact_rationals():
    for rec in asy.RECORDS.values():
        assert all(isinstance(c, Fraction) for c in rec.d_of_a)
        assert all(isinstance(c, Fraction) for comp in rec.u_of_a for c in comp)


def test_0001_at_tenth():
    assert asy.threshold_expansion("0001", 0.1) == pytest.approx(0.002625, abs=1e-15)


def test_011_pattern_at_tenth():
    u = asy.critical_pattern_expansion("011", 0.1)
    outer = 1 - 0.00125 - 0.0000625 - 0.0000015625
    np.testing.assert_allclose(u, [0.05, outer, outer], atol=1e-15)


def test_001_pattern_limit_is_binary_skeleton():
    np.testing.assert_allclose(asy.critical_pattern_expansion("001", 0.0), [0, 0, 1], atol=0)


def test_001_pattern_encoded_as_printed():
    # the printed third component repeats the 011 outer component
    u = asy.critical_pattern_expansion("001", 0.1)
    assert u[2] == pytest.approx(1 - 0.00125 - 0.0000625 - 0.0000015625, abs=1e-15)


def test_001_pattern_trace_disagrees_at_second_order():
    # the fold pattern actually follows 1 - a^2/2 in its third component
    a = 0.1
    u, _, _ = bf.fold_seed_from_branch("001", a)
    assert u[2] == pytest.approx(1 - a ** 2 / 2, abs=5 * a ** 3)
    assert abs(u[2] - asy.critical_pattern_expansion("001", a)[2]) > 1e-3


@pytest.mark.parametrize("w", ["011", "01", "0011", "0001", "0111"])
def test_other_patterns_match_the_trace(w):
    a = 0.1
    u, _, _ = bf.fold_seed_from_branch(w, a)
    k = asy.PATTERN_ORDER[w]
    assert np.max(np.abs(u - asy.critical_pattern_expansion(w, a))) <= a ** (k - 1)


def test_resolution_up_to_shift_and_extension():
    rec, k, reps = asy.resolve("110")
    assert str(rec.word) == "011" and reps == 1
    assert shift(rec.word, k) == Word.parse("110")
    rec, _, reps = asy.resolve("011011")
    assert str(rec.word) == "011" and reps == 2
    with pytest.raises(UnsupportedWord):
        asy.resolve("00011")


@given(small_a, st.integers(0, 3))
def test_pattern_is_shift_equivariant(a, k):
    base = asy.critical_pattern_expansion("0001", a)
    w = shift("0001", k)
    np.testing.assert_allclose(asy.critical_pattern_expansion(w, a), np.roll(base, -k))


@given(small_a)
def test_extension_repeats_the_pattern(a):
    u = asy.critical_pattern_expansion(periodic_extend("01", 4), a)
    np.testing.assert_allclose(u, np.tile(asy.critical_pattern_expansion("01", a), 2))


@given(st.floats(0.0, 0.5))
def test_swap_symmetry_of_homogeneous_threshold(a):
    assert asy.threshold_expansion("aaa", a) == pytest.approx(asy.threshold_expansion("aaa", 1 - a))


@pytest.mark.parametrize("w,bound_k,bound_c", [("011", 5, 5.0), ("01", 5, 5.0), ("0001", 4, 1.0)])
def test_expansion_residual_at_tenth(w, bound_k, bound_c):
    a = 0.1
    assert abs(bf.expansion_residual(w, a)) <= bound_c * a ** bound_k


def test_validate_homogeneous_is_exact():
    rep = asy.validate_against_trace("aaa", SAMPLES)
    assert rep.order is None and rep.passed
    assert max(abs(r.residual) for r in rep.rows) <= 1e-8


@pytest.mark.parametrize("w,k", [("011", 5), ("0001", 4)])
def test_validate_reports_a_bounded_constant(w, k):
    rep = asy.validate_against_trace(w, SAMPLES)
    assert rep.order == k
    assert rep.passed and rep.fitted_constant < asy.RESIDUAL_BOUND
    lines = rep.to_csv().splitlines()
    assert lines[0] == "a,d_traced,d_expansion,residual,normalized_residual"
    assert len(lines) == len(SAMPLES) + 1


def test_validate_with_supplied_trace():
    rep = asy.validate_against_trace("01", [0.1], traced=lambda a: asy.threshold_expansion("01", a))
    assert rep.fitted_constant == 0.0
