"""Static quarks: two-branch phases, Ramsey rotation and outcome probabilities.

The moving quark is dragged externally; the only dynamics is the phase
``-int V(x0 + d_s(t)) dt`` with ``V(R) = gamma R**beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, ContractError, ValidationError
from .quadrature import DEFAULT_TOL, integrate_piecewise
from .trajectory import PathPair, TrajectorySpec, dense_times, enclosed_area, path_integral

SQRT_HALF = math.sqrt(0.5)
# U = exp(-i pi/4 sigma_y)
RAMSEY_U = SQRT_HALF * np.array([[1.0, -1.0], [1.0, 1.0]])


def wrap_phase(phi: float) -> float:
    """Map a phase into ``(-pi, pi]``."""
    return math.pi - (math.pi - phi) % (2.0 * math.pi)


@dataclass(frozen=True)
class StaticConfig:
    gamma: float
    x0: float
    T: float
    beta: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "x0", "T", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite", name)
        if self.gamma < 0:
            raise ValidationError("gamma must be >= 0", "gamma")
        if self.x0 <= 0:
            raise ValidationError("x0 must be > 0", "x0")
        if self.T <= 0:
            raise ValidationError("T must be > 0", "T")
        if self.beta <= 0:
            raise ValidationError("beta must be > 0", "beta")


@dataclass(frozen=True)
class TwoBranchState:
    """Amplitudes on |up> and |down>, with the unwrapped phases that built them."""

    amp_up: complex
    amp_down: complex
    phase_up: float | None = None
    phase_down: float | None = None

    @property
    def norm(self) -> float:
        return abs(self.amp_up) ** 2 + abs(self.amp_down) ** 2

    def relative_phase(self) -> tuple[float, float | None]:
        """``(wrapped, unwrapped)`` phase of ``amp_up * conj(amp_down)``."""
        wrapped = float(np.angle(self.amp_up * np.conj(self.amp_down)))
        wrapped = wrap_phase(wrapped)
        if self.phase_up is None or self.phase_down is None:
            return wrapped, None
        return wrapped, self.phase_up - self.phase_down


def _check_separation(cfg: StaticConfig, traj: TrajectorySpec) -> None:
    t = dense_times(traj.breakpoints())
    sep = cfg.x0 + traj.evaluate(t)[0]
    if np.any(sep <= 0.0):
        i = int(np.argmin(sep))
        raise CollisionError(
            f"quark separation x0 + d(t) = {sep[i]:.6g} <= 0 at t = {t[i]:.6g}"
        )


def branch_phase(cfg: StaticConfig, traj: TrajectorySpec, tol: float = DEFAULT_TOL) -> float:
    """Unwrapped phase ``-int_0^T gamma (x0 + d(t))**beta dt`` of one branch."""
    _check_separation(cfg, traj)
    if cfg.beta == 1.0:
        return -cfg.gamma * cfg.x0 * cfg.T - cfg.gamma * path_integral(traj, tol).value

    def potential(t):
        return (cfg.x0 + traj.evaluate(t)[0]) ** cfg.beta

    scale = max(cfg.gamma, 1.0)
    return -cfg.gamma * integrate_piecewise(potential, traj.breakpoints(), tol / scale).value


def evolve_static(cfg: StaticConfig, pair: PathPair, tol: float = DEFAULT_TOL) -> TwoBranchState:
    """Exact state at ``T`` starting from ``(|up> + |down>)/sqrt(2)``.

    The common factor ``exp(-i gamma x0 T)`` is kept in both amplitudes.
    """
    if abs(pair.T - cfg.T) > 1e-12 * cfg.T:
        raise ContractError(f"pair duration {pair.T} differs from config T={cfg.T}")
    ph_up = branch_phase(cfg, pair.up, tol)
    ph_dn = branch_phase(cfg, pair.down, tol)
    return TwoBranchState(
        SQRT_HALF * complex(math.cos(ph_up), math.sin(ph_up)),
        SQRT_HALF * complex(math.cos(ph_dn), math.sin(ph_dn)),
        ph_up,
        ph_dn,
    )


def ramsey(state: TwoBranchState) -> tuple[float, float]:
    """Apply ``exp(-i pi/4 sigma_y)`` and return ``(P_up, P_down)``."""
    if abs(state.norm - 1.0) > 1e-9:
        raise ContractError(f"state is not normalized (norm {state.norm:.12g})")
    out = RAMSEY_U @ np.array([state.amp_up, state.amp_down])
    p_up = float(abs(out[0]) ** 2)
    p_dn = float(abs(out[1]) ** 2)
    # strip the O(eps) excess the sqrt(1/2) factors leave behind
    total = p_up + p_dn
    return p_up / total, p_dn / total


@dataclass(frozen=True)
class StaticResult:
    cfg: StaticConfig
    area: float
    phase_unwrapped: float
    phase_wrapped: float
    P_up: float
    P_down: float

    def to_dict(self) -> dict:
        return {
            "gamma": self.cfg.gamma,
            "beta": self.cfg.beta,
            "x0": self.cfg.x0,
            "T": self.cfg.T,
            "area": self.area,
            "phase_unwrapped": self.phase_unwrapped,
            "phase_wrapped": self.phase_wrapped,
            "P_up": self.P_up,
            "P_down": self.P_down,
        }


def run_static(cfg: StaticConfig, pair: PathPair, tol: float = DEFAULT_TOL) -> StaticResult:
    state = evolve_static(cfg, pair, tol)
    wrapped, unwrapped = state.relative_phase()
    p_up, p_dn = ramsey(state)
    return StaticResult(cfg, enclosed_area(pair, tol), unwrapped, wrapped, p_up, p_dn)
