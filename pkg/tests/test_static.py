import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mesonloop.errors import CollisionError, ContractError, ValidationError
from mesonloop.static import (
    StaticConfig,
    TwoBranchState,
    branch_phase,
    evolve_static,
    ramsey,
    run_static,
    wrap_phase,
)
from mesonloop.trajectory import PathPair, QuinticBumpHold, SineFourthBump, random_pair, zero_path


def test_branch_phase_quintic():
    cfg = StaticConfig(gamma=0.5, x0=10.0, T=10.0)
    assert branch_phase(cfg, QuinticBumpHold(D=1.0, tau_r=2.0, T=10.0)) == pytest.approx(-54.0, abs=1e-9)


def test_fringe_value_quintic(quintic_pair):
    res = run_static(StaticConfig(gamma=0.5, x0=10.0, T=10.0), quintic_pair)
    assert res.P_up == pytest.approx(math.sin(4.0) ** 2, abs=1e-12)
    assert res.P_up == pytest.approx(0.57275, abs=5e-6)
    assert res.phase_unwrapped == pytest.approx(-8.0, abs=1e-10)


def test_half_fringe_phase(sine_pair):
    gamma = math.pi / 7.5
    wrapped, unwrapped = evolve_static(StaticConfig(gamma=gamma, x0=3.0, T=10.0), sine_pair).relative_phase()
    assert unwrapped == pytest.approx(-math.pi, abs=1e-10)
    assert abs(abs(wrapped) - math.pi) < 1e-10


def test_zero_paths_leave_everything_down():
    res = run_static(StaticConfig(gamma=0.7, x0=1.0, T=3.0), PathPair(zero_path(3.0), zero_path(3.0)))
    assert (res.P_up, res.P_down) == (0.0, 1.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 3.0))
def test_fringe_law_and_normalization(seed, gamma):
    rng = np.random.Generator(np.random.Philox(seed))
    x0 = float(rng.uniform(0.5, 10))
    T = float(rng.uniform(0.5, 20))
    pair = random_pair(rng, x0, T)
    cfg = StaticConfig(gamma=gamma, x0=x0, T=T)
    state = evolve_static(cfg, pair)
    assert state.norm == pytest.approx(1.0, abs=1e-14)
    res = run_static(cfg, pair)
    assert res.P_up + res.P_down == pytest.approx(1.0, abs=1e-15)
    assert res.P_up == pytest.approx(math.sin(0.5 * gamma * res.area) ** 2, abs=1e-10)


@given(st.floats(0.1, 2.0), st.floats(0.5, 5.0))
def test_common_offset_cancels(gamma, shift):
    # moving the static quark shifts both branch phases equally
    pair = PathPair(SineFourthBump(D=0.4, T=4.0), SineFourthBump(D=-0.3, T=4.0))
    a = run_static(StaticConfig(gamma=gamma, x0=1.0, T=4.0), pair)
    b = run_static(StaticConfig(gamma=gamma, x0=1.0 + shift, T=4.0), pair)
    assert a.phase_unwrapped == pytest.approx(b.phase_unwrapped, abs=1e-10)
    assert a.P_up == pytest.approx(b.P_up, abs=1e-10)


def test_nonlinear_potential_breaks_area_law():
    base = dict(gamma=0.1, x0=10.0, T=10.0, beta=2.0)
    a = PathPair(SineFourthBump(D=2.0, T=10.0), SineFourthBump(D=-2.0, T=10.0))
    b = PathPair(SineFourthBump(D=3.0, T=10.0), SineFourthBump(D=-1.0, T=10.0))
    pa = run_static(StaticConfig(**base), a).phase_unwrapped
    pb = run_static(StaticConfig(**base), b).phase_unwrapped
    # V = gamma R^2: the phase difference picks up gamma int (d_up^2 - d_down^2) = 0.1 * 8 * 105/32
    assert pa == pytest.approx(-0.1 * (2 * 10 * 15.0), abs=1e-8)
    assert pb - pa == pytest.approx(-0.1 * 8.0 * 10 * 35.0 / 128.0, abs=1e-8)


def test_collision_detected():
    cfg = StaticConfig(gamma=1.0, x0=1.0, T=5.0)
    with pytest.raises(CollisionError):
        evolve_static(cfg, PathPair(zero_path(5.0), SineFourthBump(D=-1.5, T=5.0)))


def test_config_validation():
    with pytest.raises(ValidationError):
        StaticConfig(gamma=-1.0, x0=1.0, T=1.0)
    with pytest.raises(ValidationError):
        StaticConfig(gamma=1.0, x0=0.0, T=1.0)
    with pytest.raises(ContractError):
        evolve_static(StaticConfig(gamma=1.0, x0=1.0, T=2.0), PathPair(zero_path(1.0), zero_path(1.0)))


def test_ramsey_requires_normalized_state():
    with pytest.raises(ContractError):
        ramsey(TwoBranchState(1.0, 1.0))


@given(st.floats(-50, 50))
def test_wrap_phase_range(phi):
    w = wrap_phase(phi)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(phi), abs=1e-12)
