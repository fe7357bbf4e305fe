import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mesonloop.dynamic import DynamicConfig
from mesonloop.trajectory import PathPair, QuinticBumpHold, SineFourthBump

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def quintic_pair():
    return PathPair(
        QuinticBumpHold(D=1.0, tau_r=2.0, T=10.0), QuinticBumpHold(D=-1.0, tau_r=2.0, T=10.0)
    )


@pytest.fixture
def sine_pair():
    return PathPair(SineFourthBump(D=1.0, T=10.0), SineFourthBump(D=-1.0, T=10.0))


@pytest.fixture
def standard():
    cfg = DynamicConfig(m=1.0, omega=5.0, gamma=0.1, x0=10.0, T=20.0)
    pair = PathPair(
        QuinticBumpHold(D=1.0, tau_r=5.0, T=20.0), QuinticBumpHold(D=-1.0, tau_r=5.0, T=20.0)
    )
    return cfg, pair


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k].line())
