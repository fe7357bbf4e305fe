"""Composite Simpson quadrature with dyadic refinement.

Integrands in this package are smooth on each piece between trajectory
breakpoints, so a non-adaptive dyadic scheme with a Richardson error estimate
is enough.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

DEFAULT_TOL = 1e-10
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    n_intervals: int


def simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    min_level: int = 4,
    max_level: int = 22,
) -> QuadResult:
    """Integrate a vectorized ``f`` over ``[a, b]``.

    Trapezoid sums on 2**k panels are refined by reusing the previous nodes.
    Simpson values S_k = (4 T_k - T_{k-1}) / 3 are compared across levels;
    ``|S_k - S_{k-1}| / 15`` estimates the error, and the returned value is
    the Richardson-corrected ``S_k + (S_k - S_{k-1}) / 15``.

    Convergence requires the estimate to be below ``tol`` on two consecutive
    levels, or below the round-off floor set by ``int |f|``.

    Raises
    ------
    QuadratureError
        If ``max_level`` is reached without meeting ``tol``.
    """
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        r = simpson(f, b, a, tol, min_level, max_level)
        return QuadResult(-r.value, r.error, r.n_intervals)

    span = b - a
    fa, fb = np.asarray(f(np.array([a, b])), dtype=float)
    edge = 0.5 * (fa + fb)
    interior = 0.0
    abs_sum = 0.5 * (abs(fa) + abs(fb))
    trap_prev = span * edge
    simp_prev = None
    err_prev = np.inf
    n = 1
    for level in range(1, max_level + 1):
        n *= 2
        h = span / n
        new_nodes = a + h * np.arange(1, n, 2)
        vals = np.asarray(f(new_nodes), dtype=float)
        interior += vals.sum()
        abs_sum += np.abs(vals).sum()
        trap = h * (edge + interior)
        simp = (4.0 * trap - trap_prev) / 3.0
        trap_prev = trap
        if simp_prev is not None:
            err = abs(simp - simp_prev) / 15.0
            floor = 16.0 * _EPS * h * abs_sum
            if level >= min_level and (
                (err <= tol and err_prev <= 16.0 * tol) or err <= floor
            ):
                return QuadResult(simp + (simp - simp_prev) / 15.0, err, n)
            err_prev = err
        simp_prev = simp
    raise QuadratureError(
        f"Simpson quadrature on [{a}, {b}] did not reach tol={tol:g} "
        f"after {n} panels (last error estimate {err_prev:.3g})"
    )


def integrate_piecewise(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    tol: float = DEFAULT_TOL,
    **kwargs,
) -> QuadResult:
    """Sum of :func:`simpson` over consecutive breakpoint intervals.

    The tolerance is split evenly across the pieces.
    """
    pts = np.asarray(breakpoints, dtype=float)
    pieces = len(pts) - 1
    if pieces < 1:
        return QuadResult(0.0, 0.0, 0)
    total = 0.0
    err = 0.0
    count = 0
    for lo, hi in zip(pts[:-1], pts[1:]):
        r = simpson(f, lo, hi, tol / pieces, **kwargs)
        total += r.value
        err += r.error
        count += r.n_intervals
    return QuadResult(total, err, count)


def cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Running Simpson integral of samples on a uniform grid.

    ``y`` holds 2M+1 samples with spacing ``h``; the result has M+1 entries,
    the integral from the first node up to each even node.
    """
    y = np.asarray(y)
    if y.shape[-1] % 2 != 1:
        raise ValueError("cumulative_simpson needs an odd number of samples")
    panels = (h / 3.0) * (y[..., :-2:2] + 4.0 * y[..., 1:-1:2] + y[..., 2::2])
    out = np.zeros(y.shape[:-1] + (panels.shape[-1] + 1,), dtype=panels.dtype)
    np.cumsum(panels, axis=-1, out=out[..., 1:])
    return out


def simpson_samples(y: np.ndarray, h: float) -> float:
    """Composite Simpson rule on 2M+1 uniform samples."""
    y = np.asarray(y)
    if y.shape[-1] % 2 != 1 or y.shape[-1] < 3:
        raise ValueError("simpson_samples needs an odd number (>= 3) of samples")
    return (h / 3.0) * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
