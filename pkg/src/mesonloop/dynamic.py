"""Dynamic quark in a moving harmonic trap: exact branch solutions and interference.

For each internal level s the trap centre follows
``x_s(t) = x0 - gamma/(m w^2) + d_s(t)`` and the wavefunction stays a coherent
state, displaced from the centre by the forced-oscillator response
``q'' + w^2 q = -d''``.  :func:`solve_branch` evaluates the response through the
Green's function; :func:`solve_branch_ode` time-steps the same initial value
problem independently.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConsistencyError, ContractError, QuadratureError, ValidationError
from .quadrature import DEFAULT_TOL, cumulative_simpson, integrate_piecewise, simpson_samples
from .static import wrap_phase
from .trajectory import PathPair, TrajectorySpec, max_acceleration, path_integral

ADIABATIC_THRESHOLD = 0.1
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DynamicConfig:
    m: float
    omega: float
    gamma: float
    x0: float
    T: float

    def __post_init__(self):
        for name in ("m", "omega", "gamma", "x0", "T"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite", name)
        if self.m <= 0:
            raise ValidationError("m must be > 0", "m")
        if self.omega <= 0:
            raise ValidationError("omega must be > 0", "omega")
        if self.gamma < 0:
            raise ValidationError("gamma must be >= 0", "gamma")
        if self.T <= 0:
            raise ValidationError("T must be > 0", "T")
        if self.x0 <= self.gamma / (self.m * self.omega**2):
            raise ValidationError(
                "x0 must exceed gamma/(m omega^2) so the equilibrium stays positive", "x0"
            )

    @property
    def x0_bar(self) -> float:
        """Equilibrium position ``x_s(0)`` of the loaded trap."""
        return self.x0 - self.gamma / (self.m * self.omega**2)

    @property
    def ground_width(self) -> float:
        """Position spread ``1/sqrt(2 m w)`` of the oscillator ground state."""
        return 1.0 / math.sqrt(2.0 * self.m * self.omega)

    @property
    def dropped_constant(self) -> float:
        """Energy shift ``gamma x0 - gamma^2/(2 m w^2)`` removed by completing the square."""
        return self.gamma * self.x0 - self.gamma**2 / (2.0 * self.m * self.omega**2)

    def forcing(self, d):
        """``f_s = G x0 - G^2/(2 m w^2)`` with ``G = -m w^2 d``."""
        G = -self.m * self.omega**2 * d
        return G * self.x0 - G * G / (2.0 * self.m * self.omega**2)


def coherent_amplitude(m: float, omega: float, q: float, velocity: float) -> complex:
    """``sqrt(m w/2) q + i m v / sqrt(2 m w)`` for displacement q and velocity v."""
    return complex(math.sqrt(m * omega / 2.0) * q, m * velocity / math.sqrt(2.0 * m * omega))


@dataclass(frozen=True)
class BranchState:
    """Solution of one internal level at ``t = T``.

    ``phi0`` and ``phi0_tilde`` are unwrapped; use :func:`wrap_phase` for the
    principal value.
    """

    q: float
    q_dot: float
    alpha: complex
    phi0_tilde: float
    phi0: float
    gamma_phase: float
    x_s_final: float
    f_integral: float
    d_dot_final: float
    cfg: DynamicConfig = dataclasses.field(repr=False)
    traj: TrajectorySpec = dataclasses.field(repr=False)

    @property
    def total_phase(self) -> float:
        """``Phi^(s) = Phi_0^(s)(T) - gamma int d_s``."""
        return self.phi0 + self.gamma_phase

    def check(self, tol: float = 1e-12) -> None:
        """Recompute the derived fields and raise on mismatch."""
        cfg = self.cfg
        v = self.d_dot_final + self.q_dot
        alpha = coherent_amplitude(cfg.m, cfg.omega, self.q, v)
        scale = max(1.0, abs(alpha))
        if abs(alpha - self.alpha) > tol * scale:
            raise ConsistencyError(f"alpha mismatch: stored {self.alpha}, recomputed {alpha}")
        phi0 = self.phi0_tilde + 0.5 * cfg.m * v * self.q
        if abs(phi0 - self.phi0) > tol * max(1.0, abs(phi0)):
            raise ConsistencyError(f"phi0 mismatch: stored {self.phi0}, recomputed {phi0}")


def _assemble(cfg, traj, q, q_dot, i_f, i_vv, i_qq, i_d=None, tol=DEFAULT_TOL) -> BranchState:
    d_T, v_T, _ = traj.evaluate(cfg.T)
    d_T, v_T = float(d_T), float(v_T)
    phi0_tilde = -i_f + 0.5 * cfg.m * i_vv - 0.5 * cfg.m * i_qq
    vel = v_T + q_dot
    if i_d is None:
        i_d = path_integral(traj, tol).value
    state = BranchState(
        q=q,
        q_dot=q_dot,
        alpha=coherent_amplitude(cfg.m, cfg.omega, q, vel),
        phi0_tilde=float(phi0_tilde),
        phi0=float(phi0_tilde + 0.5 * cfg.m * vel * q),
        gamma_phase=float(-cfg.gamma * i_d),
        x_s_final=cfg.x0_bar + d_T,
        f_integral=float(i_f),
        d_dot_final=v_T,
        cfg=cfg,
        traj=traj,
    )
    state.check()
    return state


def _check_duration(cfg: DynamicConfig, traj: TrajectorySpec) -> None:
    if abs(traj.T - cfg.T) > 1e-12 * cfg.T:
        raise ContractError(f"trajectory duration {traj.T} differs from config T={cfg.T}")


def _green_pass(cfg: DynamicConfig, traj: TrajectorySpec, level: int) -> np.ndarray:
    """``(q(T), q_dot(T), int (q_dot^2 - w^2 q^2))`` with 2**level panels per piece."""
    w = cfg.omega
    n = 2**level
    c_acc = 0.0
    s_acc = 0.0
    i_qq = 0.0
    q = q_dot = 0.0
    pts = traj.breakpoints()
    for lo, hi in zip(pts[:-1], pts[1:]):
        t = np.linspace(lo, hi, n + 1)
        h = (hi - lo) / n
        acc = traj.evaluate(t)[2]
        cw = np.cos(w * t)
        sw = np.sin(w * t)
        cos_part = c_acc + cumulative_simpson(cw * acc, h)
        sin_part = s_acc + cumulative_simpson(sw * acc, h)
        ce, se = cw[::2], sw[::2]
        q_t = -(se * cos_part - ce * sin_part) / w
        qd_t = -(ce * cos_part + se * sin_part)
        i_qq += simpson_samples(qd_t**2 - w * w * q_t**2, 2.0 * h)
        c_acc, s_acc = cos_part[-1], sin_part[-1]
        q, q_dot = q_t[-1], qd_t[-1]
    return np.array([q, q_dot, i_qq])


def solve_branch(
    cfg: DynamicConfig,
    traj: TrajectorySpec,
    tol: float = DEFAULT_TOL,
    max_level: int = 20,
) -> BranchState:
    """Exact branch solution at ``t = T`` by Green's-function quadrature.

    ``q(t) = -(1/w) int_0^t sin(w (t - t')) d''(t') dt'`` is accumulated with
    cumulative Simpson sums on a grid refined dyadically until every output
    changes by less than ``15 tol``.  The ``q``-dependent phase integral uses
    the same grid as the response itself.
    """
    _check_duration(cfg, traj)
    if tol <= 0:
        raise ContractError("tol must be positive")
    prev = _green_pass(cfg, traj, 3)
    prev_err = np.inf
    for level in range(4, max_level + 1):
        cur = _green_pass(cfg, traj, level)
        err = np.abs(cur - prev) / 15.0
        floor = 16.0 * _EPS * np.maximum(np.abs(cur), 1.0) * 2.0 ** (level / 2)
        done = np.all((err <= tol) & (prev_err <= 16.0 * tol)) or np.all(err <= floor)
        if done:
            out = cur + (cur - prev) / 15.0
            break
        prev, prev_err = cur, np.max(err)
    else:
        raise QuadratureError(
            f"Green's-function quadrature did not reach tol={tol:g} at 2**{max_level} panels"
        )
    q, q_dot, i_qq = (float(v) for v in out)
    pts = traj.breakpoints()
    i_f = integrate_piecewise(lambda t: cfg.forcing(traj.evaluate(t)[0]), pts, tol).value
    i_vv = integrate_piecewise(lambda t: traj.evaluate(t)[1] ** 2, pts, tol).value
    return _assemble(cfg, traj, q, q_dot, i_f, i_vv, i_qq, tol=tol)


def solve_branch_ode(cfg: DynamicConfig, traj: TrajectorySpec, dt: float) -> BranchState:
    """Same contract as :func:`solve_branch`, by RK4 time stepping.

    The state ``(q, q_dot)`` is augmented with the running phase integrals.
    Each smooth piece of the trajectory gets an integer number of steps no
    longer than ``dt``.
    """
    _check_duration(cfg, traj)
    if not (0 < dt <= 0.1 / cfg.omega * (1 + 1e-12)):
        raise ContractError(f"dt={dt} must satisfy 0 < dt <= 0.1/omega = {0.1 / cfg.omega:g}")
    q = q_dot = 0.0
    totals = np.zeros(4)  # int f, int d_dot^2, int (q_dot^2 - w^2 q^2), int d
    pts = traj.breakpoints()
    for lo, hi in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((hi - lo) / dt - 1e-9))
        h = (hi - lo) / n
        t = np.linspace(lo, hi, 2 * n + 1)
        d, v, a = traj.evaluate(t)
        q, q_dot, i_f, i_vv, i_qq, i_d = kernels.rk4_forced_oscillator(
            cfg.omega, h, a, v, d, cfg.forcing(d), q, q_dot
        )
        totals += (i_f, i_vv, i_qq, i_d)
    i_f, i_vv, i_qq, i_d = (float(x) for x in totals)
    return _assemble(cfg, traj, float(q), float(q_dot), i_f, i_vv, i_qq, i_d)


@dataclass(frozen=True)
class InterferenceResult:
    delta_phi: float
    B: complex
    B0: float
    delta: float
    P_up: float
    P_down: float
    visibility: float
    cfg: DynamicConfig = dataclasses.field(repr=False)
    pair: PathPair = dataclasses.field(repr=False)

    @property
    def delta_phi_wrapped(self) -> float:
        return wrap_phase(self.delta_phi)


def interference(up: BranchState, down: BranchState) -> InterferenceResult:
    """Reduced-density-matrix coherence and Ramsey probabilities of two branches."""
    if up.cfg != down.cfg:
        raise ContractError("branches were solved with different configurations")
    a_up, a_dn = up.alpha, down.alpha
    B = complex(np.exp(-0.5 * (abs(a_up) ** 2 + abs(a_dn) ** 2) + a_up * a_dn.conjugate()))
    delta_phi = up.total_phase - down.total_phase
    coherence = (math.cos(delta_phi) * B.real - math.sin(delta_phi) * B.imag)
    B0 = abs(B)
    return InterferenceResult(
        delta_phi=delta_phi,
        B=B,
        B0=B0,
        delta=math.atan2(B.imag, B.real),
        P_up=0.5 * (1.0 - coherence),
        P_down=0.5 * (1.0 + coherence),
        visibility=B0,
        cfg=up.cfg,
        pair=PathPair(up.traj, down.traj),
    )


def gamma_phase_difference(
    result_2: InterferenceResult, result_1: InterferenceResult, pair: PathPair
) -> float:
    """``Delta Phi(gamma_2) - Delta Phi(gamma_1)`` for one pair at two string tensions."""
    if result_1.pair != pair or result_2.pair != pair:
        raise ContractError("results were computed for a different path pair")
    if dataclasses.replace(result_2.cfg, gamma=result_1.cfg.gamma) != result_1.cfg:
        raise ContractError("configurations differ in more than gamma")
    return result_2.delta_phi - result_1.delta_phi


def adiabaticity_margin(cfg: DynamicConfig, pair: PathPair) -> tuple[float, bool]:
    """``a_max T sqrt(2 m / w)``; acceleration is slow enough when this is below 0.1."""
    a_max = max(max_acceleration(pair.up), max_acceleration(pair.down))
    margin = a_max * cfg.T * math.sqrt(2.0 * cfg.m / cfg.omega)
    return margin, margin < ADIABATIC_THRESHOLD


@dataclass(frozen=True)
class DynamicRun:
    up: BranchState
    down: BranchState
    result: InterferenceResult
    margin: float
    adiabatic: bool

    def to_dict(self) -> dict:
        cfg = self.result.cfg
        return {
            "cfg": dataclasses.asdict(cfg),
            "pair": self.result.pair.to_dict(),
            "q_up": self.up.q,
            "qdot_up": self.up.q_dot,
            "q_down": self.down.q,
            "qdot_down": self.down.q_dot,
            "alpha_up": [self.up.alpha.real, self.up.alpha.imag],
            "alpha_down": [self.down.alpha.real, self.down.alpha.imag],
            "phi0_up": self.up.phi0,
            "phi0_down": self.down.phi0,
            "delta_phi": self.result.delta_phi,
            "delta_phi_wrapped": self.result.delta_phi_wrapped,
            "B": [self.result.B.real, self.result.B.imag],
            "P_up": self.result.P_up,
            "P_down": self.result.P_down,
            "margin": self.margin,
        }


def run_dynamic(cfg: DynamicConfig, pair: PathPair, tol: float = DEFAULT_TOL) -> DynamicRun:
    up = solve_branch(cfg, pair.up, tol)
    down = solve_branch(cfg, pair.down, tol)
    margin, ok = adiabaticity_margin(cfg, pair)
    return DynamicRun(up, down, interference(up, down), margin, ok)
