"""Kernel backend selection.

The compiled extension is used when it imports; setting
``MESONLOOP_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MESONLOOP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

rk4_forced_oscillator = _impl.rk4_forced_oscillator
apply_quadratic_phase = _impl.apply_quadratic_phase

__all__ = ["BACKEND", "rk4_forced_oscillator", "apply_quadratic_phase"]
