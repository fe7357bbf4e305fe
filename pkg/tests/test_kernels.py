import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mesonloop import _kernels_py, kernels

compiled = pytest.importorskip("mesonloop._kernels")


def _forcing(seed, n):
    rng = np.random.Generator(np.random.Philox(seed))
    arrays = [np.ascontiguousarray(rng.normal(size=2 * n + 1)) for _ in range(4)]
    return arrays, float(rng.uniform(0.5, 5.0)), float(rng.uniform(1e-3, 0.02))


@given(st.integers(0, 2**32 - 1), st.integers(1, 300), st.floats(-1, 1), st.floats(-1, 1))
def test_rk4_backends_agree(seed, n, q0, v0):
    (acc, vel, disp, frc), omega, h = _forcing(seed, n)
    a = compiled.rk4_forced_oscillator(omega, h, acc, vel, disp, frc, q0, v0)
    b = _kernels_py.rk4_forced_oscillator(omega, h, acc, vel, disp, frc, q0, v0)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-3, 3), st.floats(-3, 3))
def test_phase_backends_agree(seed, center, a, b):
    rng = np.random.Generator(np.random.Philox(seed))
    x = np.linspace(-10, 10, 256)
    psi = rng.normal(size=256) + 1j * rng.normal(size=256)
    p1, p2 = psi.copy(), psi.copy()
    compiled.apply_quadratic_phase(p1, x, center, a, b)
    _kernels_py.apply_quadratic_phase(p2, x, center, a, b)
    assert np.allclose(p1, p2, rtol=1e-13, atol=1e-13)
    assert np.allclose(np.abs(p1), np.abs(psi), rtol=1e-14)


def test_free_oscillation_is_exact_to_fourth_order():
    n, omega = 2000, 2.0
    h = 2 * np.pi / omega / n
    zeros = np.zeros(2 * n + 1)
    q, v, *_ = kernels.rk4_forced_oscillator(omega, h, zeros, zeros, zeros, zeros, 1.0, 0.0)
    assert abs(q - 1.0) < 1e-10 and abs(v) < 1e-9


def test_env_var_forces_fallback():
    env = dict(os.environ, MESONLOOP_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from mesonloop import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
    if os.environ.get("MESONLOOP_PURE_PYTHON") is None:
        assert kernels.BACKEND == "cython"
