"""Displacement paths d_s(t) of the moving quark and their derived quantities.

Every family vanishes together with its first and second derivative at both
ends of ``[0, T]``, so the opening functions G_s = -m w^2 d_s switch on and off
smoothly.  Derivatives are evaluated in closed form.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.interpolate import BSpline, make_interp_spline
from scipy.optimize import minimize_scalar

from .errors import ConstructionError, ValidationError
from .quadrature import DEFAULT_TOL, QuadResult, integrate_piecewise

ENDPOINT_TOL = 1e-12
SAMPLES_PER_PIECE = 2048


def smoothstep5(u):
    """Quintic smoothstep 10u^3 - 15u^4 + 6u^5 and its first two derivatives."""
    u2 = u * u
    s = u2 * u * (10.0 - 15.0 * u + 6.0 * u2)
    ds = 30.0 * u2 * (1.0 - u) ** 2
    dds = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return s, ds, dds


@dataclass(frozen=True, kw_only=True)
class TrajectorySpec:
    """Base class of the path families; ``T`` is the total duration."""

    T: float
    family: ClassVar[str] = ""

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValidationError(f"T must be positive and finite, got {self.T!r}", "T")

    def evaluate(self, t):
        """Return ``(d, d_dot, d_ddot)`` at ``t`` (scalar or array).

        Outside ``[0, T]`` all three are zero.
        """
        t = np.asarray(t, dtype=float)
        d = np.zeros_like(t)
        v = np.zeros_like(t)
        a = np.zeros_like(t)
        inside = (t >= 0.0) & (t <= self.T)
        if np.any(inside):
            d[inside], v[inside], a[inside] = self._eval_inside(t[inside])
        return d, v, a

    def _eval_inside(self, t):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Times splitting ``[0, T]`` into pieces on which the path is analytic."""
        return (0.0, float(self.T))

    def params(self) -> dict:
        raise NotImplementedError

    def scaled(self, factor: float) -> "TrajectorySpec":
        """The same shape with every displacement multiplied by ``factor``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"family": self.family, "params": self.params(), "T": float(self.T)}


@dataclass(frozen=True, kw_only=True)
class QuinticBumpHold(TrajectorySpec):
    """Smoothstep ramp to ``D`` over ``tau_r``, hold, and symmetric ramp back."""

    D: float
    tau_r: float
    family: ClassVar[str] = "QuinticBumpHold"

    def __post_init__(self):
        super().__post_init__()
        if not math.isfinite(self.D):
            raise ValidationError("D must be finite", "D")
        if not (0.0 < 2.0 * self.tau_r <= self.T * (1.0 + 1e-12)):
            raise ValidationError(
                f"QuinticBumpHold needs 0 < 2*tau_r <= T (tau_r={self.tau_r}, T={self.T})",
                "tau_r",
            )

    def _eval_inside(self, t):
        D, tr, T = self.D, self.tau_r, self.T
        d = np.full_like(t, D)
        v = np.zeros_like(t)
        a = np.zeros_like(t)
        rise = t < tr
        fall = t > T - tr
        if np.any(rise):
            s, ds, dds = smoothstep5(t[rise] / tr)
            d[rise], v[rise], a[rise] = D * s, D * ds / tr, D * dds / tr**2
        if np.any(fall):
            s, ds, dds = smoothstep5((T - t[fall]) / tr)
            d[fall], v[fall], a[fall] = D * s, -D * ds / tr, D * dds / tr**2
        return d, v, a

    def breakpoints(self):
        inner = sorted({float(self.tau_r), float(self.T - self.tau_r)})
        return (0.0, *[p for p in inner if 0.0 < p < self.T], float(self.T))

    def params(self):
        return {"D": float(self.D), "tau_r": float(self.tau_r)}

    def scaled(self, factor):
        return QuinticBumpHold(D=self.D * factor, tau_r=self.tau_r, T=self.T)


@dataclass(frozen=True, kw_only=True)
class SineFourthBump(TrajectorySpec):
    """``d(t) = D sin^4(pi t / T)``."""

    D: float
    family: ClassVar[str] = "SineFourthBump"

    def __post_init__(self):
        super().__post_init__()
        if not math.isfinite(self.D):
            raise ValidationError("D must be finite", "D")

    def _eval_inside(self, t):
        k = math.pi / self.T
        s = np.sin(k * t)
        c = np.cos(k * t)
        s2 = s * s
        d = self.D * s2 * s2
        v = 4.0 * self.D * k * s2 * s * c
        a = self.D * k * k * s2 * (12.0 * c * c - 4.0 * s2)
        return d, v, a

    def params(self):
        return {"D": float(self.D)}

    def scaled(self, factor):
        return SineFourthBump(D=self.D * factor, T=self.T)


@dataclass(frozen=True, kw_only=True)
class SampledSpline(TrajectorySpec):
    """Quintic interpolating spline through ``knots`` = ((t, d), ...).

    Both ends are clamped with zero first and second derivative.  Knots at
    t = 0 and t = T with d = 0 are added when missing.
    """

    knots: tuple
    family: ClassVar[str] = "SampledSpline"
    _spline: BSpline = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        super().__post_init__()
        try:
            pts = [(float(t), float(x)) for t, x in self.knots]
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"knots must be (time, length) pairs: {exc}", "knots") from None
        if not pts:
            raise ValidationError("SampledSpline needs at least one knot", "knots")
        if not all(math.isfinite(t) and math.isfinite(x) for t, x in pts):
            raise ValidationError("knots must be finite", "knots")
        if pts[0][0] > 0.0:
            pts.insert(0, (0.0, 0.0))
        if pts[-1][0] < self.T:
            pts.append((float(self.T), 0.0))
        times = np.array([p[0] for p in pts])
        vals = np.array([p[1] for p in pts])
        if np.any(np.diff(times) <= 0.0):
            raise ValidationError("knot times must be strictly increasing", "knots")
        if times[0] < 0.0 or times[-1] > self.T:
            raise ValidationError("knot times must lie in [0, T]", "knots")
        if abs(vals[0]) > ENDPOINT_TOL or abs(vals[-1]) > ENDPOINT_TOL:
            raise ValidationError("spline must vanish at t = 0 and t = T", "knots")
        object.__setattr__(self, "knots", tuple(pts))
        clamp = [(1, 0.0), (2, 0.0)]
        spline = make_interp_spline(times, vals, k=5, bc_type=(clamp, clamp))
        object.__setattr__(self, "_spline", spline)

    def _eval_inside(self, t):
        sp = self._spline
        return sp(t), sp(t, nu=1), sp(t, nu=2)

    def breakpoints(self):
        return tuple(p[0] for p in self.knots)

    def params(self):
        return {"knots": [[t, x] for t, x in self.knots]}

    def scaled(self, factor):
        return SampledSpline(knots=tuple((t, x * factor) for t, x in self.knots), T=self.T)


FAMILIES = {cls.family: cls for cls in (QuinticBumpHold, SineFourthBump, SampledSpline)}


def zero_path(T: float) -> TrajectorySpec:
    return SineFourthBump(D=0.0, T=T)


def trajectory_from_dict(doc: dict) -> TrajectorySpec:
    """Inverse of :meth:`TrajectorySpec.to_dict`."""
    try:
        cls = FAMILIES[doc["family"]]
    except KeyError:
        raise ValidationError(
            f"unknown trajectory family {doc.get('family')!r}; expected one of {sorted(FAMILIES)}",
            "family",
        ) from None
    params = dict(doc.get("params", {}))
    if cls is SampledSpline and "knots" in params:
        params["knots"] = tuple(tuple(k) for k in params["knots"])
    try:
        return cls(T=doc["T"], **params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {cls.family}: {exc}", "params") from None


def evaluate(traj: TrajectorySpec, t):
    """``(d, d_dot, d_ddot)`` at ``t``; floats for scalar ``t``."""
    d, v, a = traj.evaluate(t)
    if np.ndim(t) == 0:
        return float(d), float(v), float(a)
    return d, v, a


@dataclass(frozen=True)
class PathPair:
    up: TrajectorySpec
    down: TrajectorySpec

    def __post_init__(self):
        if abs(self.up.T - self.down.T) > 1e-12 * max(self.up.T, self.down.T):
            raise ValidationError(
                f"branches must share T (up T={self.up.T}, down T={self.down.T})", "T"
            )

    @property
    def T(self) -> float:
        return self.up.T

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.up.breakpoints()) | set(self.down.breakpoints())))

    def to_dict(self) -> dict:
        return {"up": self.up.to_dict(), "down": self.down.to_dict()}

    @classmethod
    def from_dict(cls, doc: dict) -> "PathPair":
        return cls(trajectory_from_dict(doc["up"]), trajectory_from_dict(doc["down"]))


@dataclass(frozen=True)
class Violation:
    constraint: str
    branch: str
    t: float
    value: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def constraints(self) -> set[str]:
        return {v.constraint for v in self.violations}


def dense_times(breakpoints, per_piece: int = SAMPLES_PER_PIECE) -> np.ndarray:
    pts = np.asarray(breakpoints, dtype=float)
    pieces = [np.linspace(lo, hi, per_piece + 1)[:-1] for lo, hi in zip(pts[:-1], pts[1:])]
    return np.concatenate(pieces + [pts[-1:]])


def _worst(constraint, branch, t, excess, values):
    i = int(np.argmax(excess))
    return Violation(constraint, branch, float(t[i]), float(values[i]))


def validate(pair: PathPair, x0: float) -> ValidationReport:
    """Check sign, collision and endpoint constraints on a dense time grid.

    Each violated constraint is reported once, at the sample where it is
    violated the most.
    """
    out = []
    t = dense_times(pair.breakpoints())
    d_up = pair.up.evaluate(t)[0]
    d_dn = pair.down.evaluate(t)[0]
    if np.any(d_up < -ENDPOINT_TOL):
        out.append(_worst("d_up >= 0", "up", t, -d_up, d_up))
    if np.any(d_dn > ENDPOINT_TOL):
        out.append(_worst("d_down <= 0", "down", t, d_dn, d_dn))
    if np.any(np.abs(d_dn) >= x0):
        out.append(_worst("|d_down| < x0", "down", t, np.abs(d_dn), d_dn))
    for branch, traj in (("up", pair.up), ("down", pair.down)):
        ends = np.array([0.0, traj.T])
        vals = np.abs(np.stack(traj.evaluate(ends)))
        if np.any(vals > ENDPOINT_TOL):
            col = int(np.argmax(vals.max(axis=0)))
            out.append(Violation("endpoint smoothness", branch, float(ends[col]), float(vals[:, col].max())))
    return ValidationReport(tuple(out))


@functools.lru_cache(maxsize=8192)
def path_integral(traj: TrajectorySpec, tol: float = DEFAULT_TOL) -> QuadResult:
    """Quadrature of ``int_0^T d(t) dt``; memoized because many callers share it."""
    return integrate_piecewise(lambda t: traj.evaluate(t)[0], traj.breakpoints(), tol)


def enclosed_area(pair: PathPair, tol: float = DEFAULT_TOL) -> float:
    """Spacetime area ``int_0^T (d_up - d_down) dt`` between the branches.

    Each branch integral is memoized, with half the tolerance per branch.
    """
    return path_integral(pair.up, 0.5 * tol).value - path_integral(pair.down, 0.5 * tol).value


def max_acceleration(traj: TrajectorySpec) -> float:
    """``max |d_ddot|`` on ``[0, T]`` from dense sampling plus bounded refinement."""
    t = dense_times(traj.breakpoints())
    acc = np.abs(traj.evaluate(t)[2])
    i = int(np.argmax(acc))
    best = float(acc[i])
    if best == 0.0:
        return 0.0
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, len(t) - 1)]
    res = minimize_scalar(
        lambda s: -abs(float(traj.evaluate(s)[2])),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12 * traj.T},
    )
    return max(best, -float(res.fun))


def min_max(traj: TrajectorySpec) -> tuple[float, float]:
    d = traj.evaluate(dense_times(traj.breakpoints()))[0]
    return float(d.min()), float(d.max())


# ---------------------------------------------------------------------------
# random and equal-area construction

_KINDS = ("quintic", "sine", "spline")


def _unit_shape(rng: np.random.Generator, T: float, kind: str):
    """A positive unit-amplitude shape: (trajectory, unit area, peak)."""
    if kind == "quintic":
        tr = float(rng.uniform(0.1, 0.5)) * T
        return QuinticBumpHold(D=1.0, tau_r=tr, T=T), T - tr, 1.0
    if kind == "sine":
        return SineFourthBump(D=1.0, T=T), 3.0 * T / 8.0, 1.0
    n_inner = int(rng.integers(2, 5))
    times = np.sort(rng.uniform(0.15, 0.85, n_inner)) * T
    if np.any(np.diff(times) < 0.08 * T):
        return None
    values = rng.uniform(0.4, 1.0, n_inner)
    traj = SampledSpline(knots=tuple(zip(times.tolist(), values.tolist())), T=T)
    lo, hi = min_max(traj)
    if lo < 0.0:
        return None
    area = path_integral(traj, 1e-13).value
    return traj, area, hi


def random_pair(
    rng: np.random.Generator,
    x0: float,
    T: float,
    max_amplitude: float | None = None,
) -> PathPair:
    """A valid pair with random families and amplitudes below ``x0``."""
    cap = 0.9 * x0 if max_amplitude is None else max_amplitude
    cap = min(cap, 0.9 * x0)
    while True:
        shapes = [_unit_shape(rng, T, _KINDS[int(rng.integers(3))]) for _ in range(2)]
        if any(s is None for s in shapes):
            continue
        (up, _, p_up), (dn, _, p_dn) = shapes
        a_up = float(rng.uniform(0.0, cap / p_up))
        a_dn = float(rng.uniform(0.0, cap / p_dn))
        return PathPair(up.scaled(a_up), dn.scaled(-a_dn))


def equal_area_family(
    A_target: float,
    x0: float,
    T: float,
    n: int,
    seed: int,
    max_attempts: int = 500,
) -> list[PathPair]:
    """``n`` visibly different valid pairs, each enclosing ``A_target``.

    Families are mixed across members, ramp times vary and the area is split
    unevenly between the branches.  Both branch amplitudes stay below
    ``0.95 * x0``.

    Raises
    ------
    ConstructionError
        If ``A_target`` cannot be reached under the amplitude bound.
    """
    if n < 1:
        raise ValidationError("n must be at least 1", "n")
    if A_target < 0:
        raise ConstructionError("A_target must be non-negative")
    cap = 0.95 * x0
    # quintic with tau_r = 0.1 T is the fullest shape on offer
    if A_target >= 2.0 * cap * 0.9 * T:
        raise ConstructionError(
            f"A_target={A_target} is infeasible with |d| < {cap:g} over T={T}"
        )
    rng = np.random.Generator(np.random.Philox(seed))
    pairs: list[PathPair] = []
    ups: list[np.ndarray] = []
    grid = np.linspace(0.0, T, 4001)
    for i in range(n):
        for _ in range(max_attempts):
            k_up = _KINDS[i % 3]
            k_dn = _KINDS[(i + 1 + int(rng.integers(2))) % 3]
            s_up = _unit_shape(rng, T, k_up)
            s_dn = _unit_shape(rng, T, k_dn)
            if s_up is None or s_dn is None:
                continue
            frac = float(rng.uniform(0.3, 0.7))
            (u, a_u, p_u), (w, a_w, p_w) = s_up, s_dn
            D_up = frac * A_target / a_u
            D_dn = (1.0 - frac) * A_target / a_w
            if D_up * p_u >= cap or D_dn * p_w >= cap:
                continue
            pair = PathPair(u.scaled(D_up), w.scaled(-D_dn))
            curve = pair.up.evaluate(grid)[0]
            if A_target > 0 and any(np.max(np.abs(curve - c)) <= 0.01 for c in ups):
                continue
            if not validate(pair, x0).ok:
                continue
            if abs(enclosed_area(pair, 1e-12) - A_target) > 1e-9:
                continue
            pairs.append(pair)
            ups.append(curve)
            break
        else:
            raise ConstructionError(
                f"could not build member {i} of an equal-area family with A={A_target}"
            )
    return pairs
