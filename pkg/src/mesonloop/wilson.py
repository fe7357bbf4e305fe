"""Strong-coupling Wilson loops traced by the moving quark.

In the strong-coupling limit the flux-tube state of length R is an energy
eigenstate with energy gamma R, so a loop whose spatial extent follows
``x(t) = x0 + d(t)`` only accumulates a phase.  Temporal gauge is assumed (the
segment along the static quark contributes nothing) and the vacuum energy is
zero.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CollisionError, ContractError
from .quadrature import DEFAULT_TOL
from .static import SQRT_HALF, StaticConfig, evolve_static
from .trajectory import PathPair, TrajectorySpec, enclosed_area, path_integral


class Rule(str, enum.Enum):
    LEFT = "left"
    MIDPOINT = "midpoint"


@dataclass(frozen=True)
class DiscretizedLoop:
    x_n: np.ndarray
    delta_t: float
    x0: float
    T: float

    @property
    def N(self) -> int:
        return len(self.x_n)


def discretize(x0: float, traj: TrajectorySpec, N: int, rule: Rule | str = Rule.LEFT) -> DiscretizedLoop:
    """Sample the separation ``x0 + d(t_n)`` on N equal steps of ``[0, T]``."""
    rule = Rule(rule)
    if N < 1:
        raise ContractError("N must be at least 1")
    dt = traj.T / N
    offset = 0.5 if rule is Rule.MIDPOINT else 0.0
    t = (np.arange(N) + offset) * dt
    x = x0 + traj.evaluate(t)[0]
    if np.any(x <= 0.0):
        i = int(np.argmin(x))
        raise CollisionError(f"separation {x[i]:.6g} <= 0 at t = {t[i]:.6g}")
    return DiscretizedLoop(x, dt, x0, traj.T)


def loop_expectation(loop: DiscretizedLoop, gamma: float) -> complex:
    """``<W(C)> = exp(-i gamma dT sum_n x_n)``."""
    phase = -gamma * loop.delta_t * math.fsum(loop.x_n)
    w = complex(math.cos(phase), math.sin(phase))
    assert abs(abs(w) - 1.0) <= 1e-15
    return w


def continuum_loop(gamma: float, x0: float, traj: TrajectorySpec, tol: float = DEFAULT_TOL) -> complex:
    """``exp(-i gamma int_0^T (x0 + d(t)) dt)``."""
    phase = -gamma * (x0 * traj.T + path_integral(traj, tol).value)
    return complex(math.cos(phase), math.sin(phase))


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    rule: str
    re: float
    im: float
    abs_error: float


def convergence_table(
    gamma: float,
    x0: float,
    traj: TrajectorySpec,
    Ns=(100, 1000, 10000),
    rules=(Rule.LEFT, Rule.MIDPOINT),
    tol: float = 1e-12,
) -> list[ConvergenceRow]:
    exact = continuum_loop(gamma, x0, traj, tol)
    rows = []
    for rule in rules:
        rule = Rule(rule)
        for N in Ns:
            w = loop_expectation(discretize(x0, traj, N, rule), gamma)
            rows.append(ConvergenceRow(int(N), rule.value, w.real, w.imag, abs(w - exact)))
    return rows


def convergence_slope(rows: list[ConvergenceRow], rule: Rule | str) -> float:
    """Least-squares slope of ``-log(error)`` against ``log(N)``.

    Errors at exact zero are floored at 1e-300 so the fit stays defined.
    """
    rule = Rule(rule).value
    sel = [r for r in rows if r.rule == rule]
    n = np.log([r.N for r in sel])
    e = np.log([max(r.abs_error, 1e-300) for r in sel])
    return float(-np.polyfit(n, e, 1)[0])


def write_convergence_csv(path, rows: list[ConvergenceRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "rule", "re", "im", "abs_error"])
        for r in rows:
            w.writerow([r.N, r.rule, repr(r.re), repr(r.im), repr(r.abs_error)])


@dataclass(frozen=True)
class CorrespondenceReport:
    amp_up: complex
    loop_up: complex
    amp_down: complex
    loop_down: complex
    deviation: float
    loop_phase: float
    area_phase: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "amp_up": [self.amp_up.real, self.amp_up.imag],
            "loop_up": [self.loop_up.real, self.loop_up.imag],
            "amp_down": [self.amp_down.real, self.amp_down.imag],
            "loop_down": [self.loop_down.real, self.loop_down.imag],
            "deviation": self.deviation,
            "loop_phase": self.loop_phase,
            "area_phase": self.area_phase,
            "ok": self.ok,
        }


def amplitude_correspondence(
    cfg: StaticConfig, pair: PathPair, tol: float = DEFAULT_TOL
) -> CorrespondenceReport:
    """Compare each static amplitude with ``<W(C_s)>/sqrt(2)``.

    Also reports the phase of ``<W(C_up)> conj(<W(C_down)>)`` next to
    ``-gamma A`` (both wrapped), which should coincide.
    """
    if cfg.beta != 1.0:
        raise ContractError("the Wilson-loop correspondence needs beta = 1")
    state = evolve_static(cfg, pair, tol)
    w_up = continuum_loop(cfg.gamma, cfg.x0, pair.up, tol)
    w_dn = continuum_loop(cfg.gamma, cfg.x0, pair.down, tol)
    dev = max(abs(state.amp_up - SQRT_HALF * w_up), abs(state.amp_down - SQRT_HALF * w_dn))
    loop_phase = float(np.angle(w_up * w_dn.conjugate()))
    area_phase = float(np.angle(np.exp(-1j * cfg.gamma * enclosed_area(pair, tol))))
    return CorrespondenceReport(
        state.amp_up, SQRT_HALF * w_up, state.amp_down, SQRT_HALF * w_dn,
        float(dev), loop_phase, area_phase, bool(dev <= 1e-9),
    )
