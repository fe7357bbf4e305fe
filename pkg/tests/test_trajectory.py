import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mesonloop.errors import ConstructionError, ValidationError
from mesonloop.trajectory import (
    PathPair,
    QuinticBumpHold,
    SampledSpline,
    SineFourthBump,
    enclosed_area,
    equal_area_family,
    evaluate,
    max_acceleration,
    random_pair,
    trajectory_from_dict,
    validate,
    zero_path,
)

quintics = st.builds(
    lambda D, frac, T: QuinticBumpHold(D=D, tau_r=frac * T, T=T),
    st.floats(-3, 3), st.floats(0.05, 0.5), st.floats(0.5, 30),
)
sines = st.builds(lambda D, T: SineFourthBump(D=D, T=T), st.floats(-3, 3), st.floats(0.5, 30))
splines = st.builds(
    lambda vals, T: SampledSpline(
        knots=tuple((T * (i + 1) / (len(vals) + 1), v) for i, v in enumerate(vals)), T=T
    ),
    st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.floats(1, 20),
)
any_traj = st.one_of(quintics, sines, splines)


@given(any_traj)
def test_endpoints_vanish_to_second_order(traj):
    for t in (0.0, traj.T):
        d, v, a = evaluate(traj, t)
        scale = 1.0 + max(abs(x) for x in (d, v, a))
        assert abs(d) <= 1e-12 * scale
        assert abs(v) <= 1e-12 * scale / traj.T
        assert abs(a) <= 1e-12 * scale / traj.T**2


@given(any_traj, st.floats(0.01, 50))
def test_zero_outside_support(traj, offset):
    for t in (-offset, traj.T + offset):
        assert evaluate(traj, t) == (0.0, 0.0, 0.0)


@given(any_traj)
def test_dict_round_trip(traj):
    again = trajectory_from_dict(traj.to_dict())
    t = np.linspace(0.0, traj.T, 33)
    for a, b in zip(traj.evaluate(t), again.evaluate(t)):
        assert np.array_equal(a, b)


@given(any_traj, st.floats(-2, 2))
def test_scaling_is_linear(traj, k):
    t = np.linspace(0.0, traj.T, 17)
    for a, b in zip(traj.scaled(k).evaluate(t), traj.evaluate(t)):
        assert np.allclose(a, k * b, rtol=1e-12, atol=1e-12)


@given(any_traj)
def test_derivatives_match_finite_differences(traj):
    h = 1e-4 * traj.T
    t = np.linspace(0.1, 0.9, 7) * traj.T
    # the jerk may jump at breakpoints, which spoils central differences there
    t = t[np.min(np.abs(t[:, None] - np.array(traj.breakpoints())), axis=1) > 2 * h]
    d_p, v_p, _ = traj.evaluate(t + h)
    d_m, v_m, _ = traj.evaluate(t - h)
    _, v, a = traj.evaluate(t)
    _, v_all, a_all = traj.evaluate(np.linspace(0, traj.T, 400))
    assert np.allclose((d_p - d_m) / (2 * h), v, atol=1e-5 * (1e-12 + np.max(np.abs(v_all))))
    assert np.allclose((v_p - v_m) / (2 * h), a, atol=1e-5 * (1e-12 + np.max(np.abs(a_all))))


def test_sine_fourth_second_derivative_at_peak():
    # sympy: d^2/dt^2 sin(pi t/10)^4 at t = 5
    d, v, a = evaluate(SineFourthBump(D=1.0, T=10.0), 5.0)
    assert d == pytest.approx(1.0, abs=1e-15)
    assert abs(v) < 1e-12
    assert a == pytest.approx(-0.39478417604357434475, abs=1e-12)
    h = 1e-4
    fd = (evaluate(SineFourthBump(D=1.0, T=10.0), 5 + h)[0] - 2 * d
          + evaluate(SineFourthBump(D=1.0, T=10.0), 5 - h)[0]) / h**2
    assert abs(fd - a) <= 1e-8 * 100


def test_quintic_and_sine_areas(quintic_pair, sine_pair):
    assert enclosed_area(quintic_pair, 1e-13) == pytest.approx(16.0, abs=1e-11)
    assert enclosed_area(sine_pair, 1e-13) == pytest.approx(7.5, abs=1e-11)


@given(st.floats(0.1, 5), st.floats(0.05, 0.5), st.floats(1, 30))
def test_quintic_branch_integral_closed_form(D, frac, T):
    tr = QuinticBumpHold(D=D, tau_r=frac * T, T=T)
    pair = PathPair(tr, zero_path(T))
    assert enclosed_area(pair, 1e-12) == pytest.approx(D * (T - frac * T), rel=1e-10, abs=1e-11)


def test_quintic_peak_acceleration():
    assert max_acceleration(QuinticBumpHold(D=1.0, tau_r=2.0, T=10.0)) == pytest.approx(
        10.0 / math.sqrt(3.0) / 4.0, rel=1e-9
    )


def test_validate_flags_each_constraint():
    bad_sign = PathPair(QuinticBumpHold(D=-1.0, tau_r=2.0, T=10.0), zero_path(10.0))
    assert "d_up >= 0" in validate(bad_sign, 10.0).constraints()
    wrong_down = PathPair(zero_path(10.0), SineFourthBump(D=1.0, T=10.0))
    assert "d_down <= 0" in validate(wrong_down, 10.0).constraints()
    collide = PathPair(zero_path(10.0), SineFourthBump(D=-12.0, T=10.0))
    assert "|d_down| < x0" in validate(collide, 10.0).constraints()


def test_spline_validation_errors():
    with pytest.raises(ValidationError):
        SampledSpline(knots=((5.0, 1.0), (3.0, 0.5)), T=10.0)
    with pytest.raises(ValidationError):
        QuinticBumpHold(D=1.0, tau_r=6.0, T=10.0)


def test_pair_durations_must_match():
    with pytest.raises(ValidationError):
        PathPair(zero_path(10.0), zero_path(11.0))


@given(st.integers(0, 2**32 - 1))
def test_random_pairs_are_valid(seed):
    rng = np.random.Generator(np.random.Philox(seed))
    x0 = float(rng.uniform(0.5, 10))
    pair = random_pair(rng, x0, float(rng.uniform(1, 20)))
    assert validate(pair, x0).ok


def test_equal_area_family():
    fam = equal_area_family(16.0, 20.0, 10.0, 5, seed=7)
    grid = np.linspace(0.0, 10.0, 2001)
    curves = [p.up.evaluate(grid)[0] for p in fam]
    for i in range(5):
        assert validate(fam[i], 20.0).ok
        assert enclosed_area(fam[i], 1e-12) == pytest.approx(16.0, abs=1e-9)
        for j in range(i):
            assert np.max(np.abs(curves[i] - curves[j])) > 0.01
    assert equal_area_family(16.0, 20.0, 10.0, 5, seed=7) == fam


def test_infeasible_family():
    with pytest.raises(ConstructionError):
        equal_area_family(100.0, 0.5, 1.0, 5, seed=0)
