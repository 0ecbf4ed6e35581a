import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nagumo_lattice import equilibria as eq
from nagumo_lattice import waves
from nagumo_lattice.errors import MissingEquilibrium, SamePhase
from nagumo_lattice.waves import Boundary, FrontSpec, LatticeState


def P(a, d):
    return eq.ParameterPoint(a, d)


def test_monochromatic_initial_front():
    s, bnd = waves.tanh_front(FrontSpec("0", "1", 50.0), P(0.3, 0.05), J=100)
    assert s.J == 100
    assert s.values[0] < 1e-10 and s.values[-1] > 1 - 1e-10
    assert np.all(np.diff(s.values) >= 0) and 0.4 < s.values[49] < 0.6
    assert bnd.ghosts == (0.0, 1.0)


def test_sharp_limit_is_a_step():
    s, _ = waves.tanh_front(FrontSpec("0", "1", 50.5, width=1e-6), P(0.3, 0.05), J=100)
    np.testing.assert_array_equal(s.values, np.r_[np.zeros(50), np.ones(50)])


def test_trichromatic_initial_front():
    p = P(0.404, 0.05)
    u001 = waves.pattern("001", p)
    s, bnd = waves.tanh_front(FrontSpec("000", "001", 60.0), p, J=120)
    np.testing.assert_allclose(s.values[:20], 0.0, atol=1e-10)
    np.testing.assert_allclose(s.values[-21:], waves.lay_out(u001, 120)[-22:-1], atol=1e-10)
    # site j carries component mod(j, 3)
    np.testing.assert_allclose(bnd.right[1:4], u001)


def test_missing_pattern():
    with pytest.raises(MissingEquilibrium):
        waves.pattern("011", P(0.3, 0.5))


def test_front_spec_validation():
    with pytest.raises(ValueError):
        FrontSpec("0", "1", 10.0, width=0.0)


def test_dt_above_stability_limit():
    with pytest.raises(ValueError):
        waves.integrate(LatticeState(np.zeros(10)), P(0.3, 0.05), 1.0, dt=0.2)
    assert waves.dt_max(0.0) == 0.1
    assert waves.dt_max(10.0) < 0.01


def test_equilibrium_pattern_is_stationary():
    p = P(0.404, 0.05)
    L = waves.lay_out(waves.pattern("001", p), 60)
    traj = waves.integrate(LatticeState(L[1:-1].copy()), p, 100.0, boundary=Boundary(L, L),
                           track=False)
    assert np.max(np.abs(traj.snapshots - L[1:-1])) <= 1e-10


def test_symmetric_front_is_pinned():
    traj, est = waves.run_front("0", "1", P(0.5, 0.1), J=200, t_end=500)
    x = [q for _, q in traj.interface_series]
    assert max(x) - min(x) <= waves.PIN_TOL * 500
    assert est.pinned and abs(est.c) <= 1e-4


def test_pinned_monochromatic_front():
    _, est = waves.run_front("0", "1", P(0.5, 0.05))
    assert est.pinned and est.displacement < waves.PIN_DISPLACEMENT
    assert abs(est.c) <= 1e-4


def test_trichromatic_front_travels_right():
    _, est = waves.run_front("0", "001", P(0.404, 0.054))
    assert not est.pinned and est.c > 0


def test_001_to_1_front_travels_left():
    _, est = waves.run_front("001", "1", P(0.404, 0.05))
    assert not est.pinned and est.c < 0


def test_0001_to_1_travels_at_type_b_point():
    # the pinning threshold of this front lies below d = 0.0625 at a = 0.37
    _, est = waves.run_front("0001", "1", P(0.37, 0.0625))
    assert not est.pinned


def test_symmetric_threshold_is_same_phase():
    with pytest.raises(SamePhase):
        waves.speed_threshold(FrontSpec("0", "1", 100.0), 0.5, 0.01, 0.2, J=200, t_end=400)


def test_fit_speed_on_synthetic_series():
    t = np.linspace(0, 100, 201)
    est = waves.fit_speed(t, 3.0 - 0.02 * t)
    assert est.c == pytest.approx(-0.02) and not est.pinned
    est = waves.fit_speed(t, 50 + 1e-3 * np.sin(t))
    assert est.pinned


def test_label_sites_finds_the_two_patterns():
    L, R = waves.lay_out([0, 0, 0], 60), waves.lay_out([0, 0, 1], 60)
    v = np.r_[L[1:31], R[31:61]]
    lab = waves.label_sites(v, [L, R], 3)
    assert set(lab[3:27]) == {0} and set(lab[33:57]) == {1}


def test_snapshot_csv_layout():
    traj, _ = waves.run_front("0", "1", P(0.3, 0.1), J=40, t_end=20, stride=50)
    lines = traj.to_csv().splitlines()
    assert lines[0].split(",")[:2] == ["time", "u_1"] and len(lines[0].split(",")) == 41
    assert len(lines) == len(traj.times) + 1


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 0.8), st.floats(0.01, 0.2), st.integers(0, 2 ** 31 - 1))
def test_comparison_principle(a, d, seed):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0, 1, 60)
    hi = np.minimum(1.0, lo + rng.uniform(0, 0.3, 60))
    bnd = Boundary(np.zeros(62), np.zeros(62))
    bnd_hi = Boundary(np.ones(62), np.ones(62))
    p = P(a, d)
    A = waves.integrate(LatticeState(lo), p, 20.0, boundary=bnd, track=False, stride=20)
    B = waves.integrate(LatticeState(hi), p, 20.0, boundary=bnd_hi, track=False, stride=20)
    assert np.all(B.snapshots - A.snapshots >= -1e-12)


def test_collision_record_fields():
    rep = waves.collide("0", "001", "1", P(0.404, 0.05))
    rec = rep.to_record()
    assert rec["outcome"] == "PINNED_MONO" and rec["consumed_only_from_right"]
    assert rec["buffer_extinction_time"] is not None
