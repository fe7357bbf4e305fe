"""Brute-force Schrodinger integration of a single branch on a periodic grid.

This is the independent check of :mod:`mesonloop.dynamic`.  The kinetic
factor is applied exactly in momentum space and the potential in position
space (Strang splitting, second order in dt).  Consecutive potential
half-steps are merged, so each step costs one FFT pair and one pass of
:func:`mesonloop.kernels.apply_quadratic_phase`.
"""
from __future__ import annotations

import csv
import enum
import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .dynamic import BranchState, DynamicConfig, interference, solve_branch
from .errors import ContractError, DomainEscapeError, InstabilityError, NumericalError
from .quadrature import DEFAULT_TOL, integrate_piecewise
from .static import wrap_phase
from .trajectory import PathPair, TrajectorySpec, min_max

MAX_HERMITE = 60
EDGE_POINTS = 4
EDGE_AMPLITUDE = 1e-8
NORM_DRIFT = 1e-6
CHECK_EVERY = 2000


class Mode(str, enum.Enum):
    COMPLETED_SQUARE = "completed_square"
    ORIGINAL = "original"


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int
    dt: float

    def __post_init__(self):
        if not _is_pow2(self.n_points) or self.n_points < 256:
            raise ContractError(f"n_points must be a power of two >= 256, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ContractError("x_max must exceed x_min")
        if not self.dt > 0:
            raise ContractError("dt must be positive")

    @functools.cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points, endpoint=False)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @functools.cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def with_dt(self, dt: float) -> "Grid":
        return replace(self, dt=dt)

    def check(self, cfg: DynamicConfig, trajs) -> None:
        """Raise :class:`ContractError` unless the box and step suit ``trajs``."""
        if cfg.omega * self.dt > 0.05 * (1 + 1e-12):
            raise ContractError(f"omega*dt = {cfg.omega * self.dt:g} exceeds 0.05")
        lo, hi = _required_span(cfg, trajs, 8.0)
        if self.x_min > lo or self.x_max - self.dx < hi:
            raise ContractError(
                f"grid [{self.x_min:g}, {self.x_max:g}) does not cover [{lo:g}, {hi:g}]"
            )


def q_bound(cfg: DynamicConfig, traj: TrajectorySpec) -> float:
    """Upper bound ``(1/w) int |d''|`` on the response amplitude ``|q(t)|``."""
    r = integrate_piecewise(lambda t: np.abs(traj.evaluate(t)[2]), traj.breakpoints(), 1e-8)
    return r.value / cfg.omega


def _required_span(cfg, trajs, widths):
    lo = hi = 0.0
    qmax = 0.0
    for tr in trajs:
        a, b = min_max(tr)
        lo, hi = min(lo, a), max(hi, b)
        qmax = max(qmax, q_bound(cfg, tr))
    pad = qmax + widths * cfg.ground_width
    return cfg.x0_bar + lo - pad, cfg.x0_bar + hi + pad


def default_grid(
    cfg: DynamicConfig,
    trajs,
    n_points: int = 2048,
    dt: float | None = None,
) -> Grid:
    """Box ``x0_bar + [min d - pad, max d + pad]`` with ``pad = max|q| + 10 dx``.

    ``dx`` is the ground-state width and ``max|q|`` uses :func:`q_bound`.  The
    box is symmetric about ``x0_bar``; the step defaults to ``0.01 / omega``.
    """
    lo, hi = _required_span(cfg, trajs, 10.0)
    half = max(cfg.x0_bar - lo, hi - cfg.x0_bar)
    return Grid(float(cfg.x0_bar - half), float(cfg.x0_bar + half), n_points, dt or 0.01 / cfg.omega)


@dataclass
class WavefunctionState:
    """Grid samples of the branch state, up to ``exp(i scalar_phase)``."""

    samples: np.ndarray
    t: float
    scalar_phase: float
    grid: Grid
    snapshots: list = field(default_factory=list, repr=False)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dx)

    def full(self) -> np.ndarray:
        return self.samples * np.exp(1j * self.scalar_phase)


def ground_state(cfg: DynamicConfig, grid: Grid, center: float) -> np.ndarray:
    mw = cfg.m * cfg.omega
    y = grid.x - center
    psi = (mw / np.pi) ** 0.25 * np.exp(-0.5 * mw * y * y)
    psi = psi.astype(complex)
    return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)


def _check_edges(psi: np.ndarray, t: float) -> None:
    edge = max(np.max(np.abs(psi[:EDGE_POINTS])), np.max(np.abs(psi[-EDGE_POINTS:])))
    if edge > EDGE_AMPLITUDE:
        raise DomainEscapeError(
            f"wavefunction amplitude {edge:.3g} at the box edge at t = {t:.6g}"
        )


def _propagate(cfg, traj, grid, mode, n_steps, snapshot_stride=None) -> WavefunctionState:
    mode = Mode(mode)
    T = cfg.T
    h = T / n_steps
    x = grid.x
    t_half = np.linspace(0.0, T, 2 * n_steps + 1)
    d_half = traj.evaluate(t_half)[0]
    d_nodes = d_half[::2]
    a = 0.5 * cfg.m * cfg.omega**2
    if mode is Mode.COMPLETED_SQUARE:
        centers = cfg.x0_bar + d_nodes
        slopes = np.zeros_like(d_nodes)
        g = cfg.gamma * d_half + cfg.forcing(d_half)
        steps = (h / 6.0) * (g[:-2:2] + 4.0 * g[1:-1:2] + g[2::2])
        scalar = -np.concatenate(([0.0], np.cumsum(steps)))
    else:
        centers = np.full_like(d_nodes, cfg.x0)
        slopes = cfg.gamma - cfg.m * cfg.omega**2 * d_nodes
        scalar = np.zeros(n_steps + 1)

    kinetic = np.exp(-1j * h * grid.k**2 / (2.0 * cfg.m))
    psi = ground_state(cfg, grid, cfg.x0_bar)
    snapshots = []
    if snapshot_stride:
        snapshots.append((0.0, psi.copy(), 0.0))
    phase = kernels.apply_quadratic_phase
    fft, ifft = np.fft.fft, np.fft.ifft
    phase(psi, x, centers[0], 0.5 * a * h, 0.5 * slopes[0] * h)
    for n in range(1, n_steps + 1):
        psi = ifft(fft(psi) * kinetic)
        c, b = centers[n], slopes[n]
        snap = bool(snapshot_stride) and n % snapshot_stride == 0
        if n == n_steps or snap:
            phase(psi, x, c, 0.5 * a * h, 0.5 * b * h)
            if snap:
                snapshots.append((n * h, psi.copy(), float(scalar[n])))
            if n < n_steps:
                phase(psi, x, c, 0.5 * a * h, 0.5 * b * h)
        else:
            phase(psi, x, c, a * h, b * h)
        if n % CHECK_EVERY == 0:
            norm = np.sum(np.abs(psi) ** 2) * grid.dx
            if abs(norm - 1.0) > NORM_DRIFT:
                raise InstabilityError(f"norm drifted to {norm:.12g} at t = {n * h:.6g}")
            _check_edges(psi, n * h)
    _check_edges(psi, T)
    state = WavefunctionState(psi, T, float(scalar[-1]), grid, snapshots)
    if abs(state.norm - 1.0) > NORM_DRIFT:
        raise InstabilityError(f"final norm {state.norm:.12g}")
    return state


def evolve_branch(
    cfg: DynamicConfig,
    traj: TrajectorySpec,
    grid: Grid,
    mode: Mode | str = Mode.COMPLETED_SQUARE,
    snapshot_stride: int | None = None,
) -> WavefunctionState:
    """Evolve the trap ground state centred at ``x0_bar`` from 0 to ``T``.

    In completed-square mode the grid carries ``p^2/2m + (m w^2/2)(x - x_s)^2``
    and the c-number terms ``gamma d_s + f_s`` go into ``scalar_phase``.  In
    original mode the grid carries ``p^2/2m + (m w^2/2)(x - x0)^2 + (gamma + G_s) x``
    and ``scalar_phase`` stays zero.
    """
    grid.check(cfg, [traj])
    n_steps = max(1, math.ceil(cfg.T / grid.dt - 1e-9))
    return _propagate(cfg, traj, grid, mode, n_steps, snapshot_stride)


def evolve_branch_richardson(
    cfg: DynamicConfig,
    traj: TrajectorySpec,
    grid: Grid,
    mode: Mode | str = Mode.COMPLETED_SQUARE,
) -> WavefunctionState:
    """Combine runs with N and 2N steps as ``(4 psi_2N - psi_N) / 3``.

    Strang splitting is symmetric, so its error expands in even powers of the
    step and the combination cancels the leading ``dt^2`` term.
    """
    grid.check(cfg, [traj])
    n_steps = max(1, math.ceil(cfg.T / grid.dt - 1e-9))
    coarse = _propagate(cfg, traj, grid, mode, n_steps)
    fine = _propagate(cfg, traj, grid, mode, 2 * n_steps)
    samples = (4.0 * fine.samples - coarse.samples) / 3.0
    samples /= math.sqrt(np.sum(np.abs(samples) ** 2) * grid.dx)
    scalar = (4.0 * fine.scalar_phase - coarse.scalar_phase) / 3.0
    return WavefunctionState(samples, cfg.T, scalar, grid)


def overlap(bra: WavefunctionState, ket: WavefunctionState) -> complex:
    """``<bra|ket>`` including both scalar phases."""
    if bra.grid != ket.grid:
        raise ContractError("states live on different grids")
    if abs(bra.t - ket.t) > 1e-12 * max(1.0, abs(bra.t)):
        raise ContractError("states are at different times")
    inner = np.sum(np.conj(bra.samples) * ket.samples) * bra.grid.dx
    value = complex(inner * np.exp(1j * (ket.scalar_phase - bra.scalar_phase)))
    if abs(value) > 1.0 + 1e-9 * max(1.0, bra.norm * ket.norm):
        raise NumericalError(f"overlap magnitude {abs(value):.12g} exceeds 1")
    return value


def fidelity(a: WavefunctionState, b: WavefunctionState) -> float:
    return abs(overlap(a, b)) / math.sqrt(a.norm * b.norm)


def coherent_state_on_grid(
    alpha: complex, center: float, cfg: DynamicConfig, grid: Grid, t: float = 0.0
) -> WavefunctionState:
    """Normalized coherent state ``|alpha>`` of the oscillator centred at ``center``."""
    q = math.sqrt(2.0 / (cfg.m * cfg.omega)) * alpha.real
    p = math.sqrt(2.0 * cfg.m * cfg.omega) * alpha.imag
    y = grid.x - center
    mw = cfg.m * cfg.omega
    psi = (mw / np.pi) ** 0.25 * np.exp(-0.5 * mw * (y - q) ** 2 + 1j * p * y - 0.5j * p * q)
    _check_edges(psi, t)
    return WavefunctionState(psi.astype(complex), t, 0.0, grid)


def analytic_state(branch: BranchState, grid: Grid) -> WavefunctionState:
    """The closed-form branch state at ``T`` sampled on ``grid``.

    ``exp(i phi0_tilde) exp(-i w T/2) exp(-i gamma int d) exp(i m v y) chi_0(y - q)``
    with ``y = x - x_s(T)`` and ``v = d_dot + q_dot``; the c-number part
    ``-gamma int d - int f`` is kept in ``scalar_phase`` to match
    :func:`evolve_branch`.
    """
    cfg = branch.cfg
    mw = cfg.m * cfg.omega
    y = grid.x - branch.x_s_final
    p = cfg.m * (branch.d_dot_final + branch.q_dot)
    phase = branch.phi0_tilde + branch.f_integral - 0.5 * cfg.omega * cfg.T
    psi = (mw / np.pi) ** 0.25 * np.exp(-0.5 * mw * (y - branch.q) ** 2 + 1j * (p * y + phase))
    return WavefunctionState(psi, cfg.T, branch.gamma_phase - branch.f_integral, grid)


def hermite_functions(n_max: int, xi: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions ``psi_0 .. psi_n_max`` at ``xi`` by recurrence."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max + 1,) + xi.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi * xi)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def project_instantaneous_basis(
    state: WavefunctionState, cfg: DynamicConfig, traj: TrajectorySpec, n_max: int = 40
) -> np.ndarray:
    """Coefficients on the eigenbasis of the trap centred at ``x_s(state.t)``."""
    if not 0 <= n_max <= MAX_HERMITE:
        raise ContractError(f"n_max must lie in [0, {MAX_HERMITE}]")
    center = cfg.x0_bar + float(traj.evaluate(state.t)[0])
    scale = math.sqrt(cfg.m * cfg.omega)
    basis = hermite_functions(n_max, scale * (state.grid.x - center)) * math.sqrt(scale)
    coeffs = basis @ state.full() * state.grid.dx
    total = float(np.sum(np.abs(coeffs) ** 2))
    if 1.0 - total > 1e-4 * state.norm:
        raise ContractError(f"basis truncated too early: completeness {total:.8f}; raise n_max")
    return coeffs


def poisson_tv(coeffs: np.ndarray, mean: float) -> float:
    """Total-variation distance between ``|c_n|^2`` and Poisson(mean)."""
    from scipy.stats import poisson

    probs = np.abs(coeffs) ** 2
    ref = poisson.pmf(np.arange(len(probs)), mean)
    tail = poisson.sf(len(probs) - 1, mean)
    return 0.5 * (float(np.sum(np.abs(probs - ref))) + float(tail))


def write_snapshots_csv(path, state: WavefunctionState) -> None:
    """Rows ``t, x, re, im`` of the full state for every recorded snapshot."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "re", "im"])
        for t, samples, scalar in state.snapshots:
            full = samples * np.exp(1j * scalar)
            for xv, val in zip(state.grid.x, full):
                w.writerow([repr(float(t)), repr(float(xv)), repr(float(val.real)), repr(float(val.imag))])


@dataclass(frozen=True)
class OracleReport:
    fidelity_up: float
    fidelity_down: float
    phase_error_up: float
    phase_error_down: float
    overlap_numeric: complex
    overlap_analytic: complex
    overlap_error: float
    mode_phase_error: float | None
    P_up_numeric: float
    P_up_analytic: float
    poisson_tv_up: float

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = [v.real, v.imag] if isinstance(v, complex) else v
        return out


def oracle_check(
    cfg: DynamicConfig,
    pair: PathPair,
    grid: Grid | None = None,
    tol: float = DEFAULT_TOL,
    richardson: bool = True,
    check_modes: bool = True,
) -> OracleReport:
    """Compare the exact solution of both branches against grid evolution."""
    grid = grid or default_grid(cfg, [pair.up, pair.down])
    evolve = evolve_branch_richardson if richardson else evolve_branch
    up = solve_branch(cfg, pair.up, tol)
    down = solve_branch(cfg, pair.down, tol)
    result = interference(up, down)
    num_up = evolve(cfg, pair.up, grid)
    num_dn = evolve(cfg, pair.down, grid)
    ana_up = analytic_state(up, grid)
    ana_dn = analytic_state(down, grid)
    o_up = overlap(ana_up, num_up)
    o_dn = overlap(ana_dn, num_dn)
    o_num = overlap(num_dn, num_up)
    o_ana = complex(np.exp(1j * result.delta_phi) * result.B)
    mode_err = None
    if check_modes:
        orig = evolve(cfg, pair.up, grid, Mode.ORIGINAL)
        expected = -cfg.dropped_constant * cfg.T
        mode_err = abs(wrap_phase(float(np.angle(overlap(num_up, orig))) - expected))
    coeffs = project_instantaneous_basis(num_up, cfg, pair.up, 40)
    return OracleReport(
        fidelity_up=fidelity(ana_up, num_up),
        fidelity_down=fidelity(ana_dn, num_dn),
        phase_error_up=abs(float(np.angle(o_up))),
        phase_error_down=abs(float(np.angle(o_dn))),
        overlap_numeric=o_num,
        overlap_analytic=o_ana,
        overlap_error=abs(o_num - o_ana),
        mode_phase_error=mode_err,
        P_up_numeric=0.5 * (1.0 - o_num.real),
        P_up_analytic=result.P_up,
        poisson_tv_up=poisson_tv(coeffs, abs(up.alpha) ** 2),
    )
