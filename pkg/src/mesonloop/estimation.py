"""Simulated Ramsey counts, string-tension fits and the area-law classifier."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ContractError, NonIdentifiableError, ValidationError
from .quadrature import DEFAULT_TOL
from .static import StaticConfig, evolve_static, ramsey
from .trajectory import PathPair, enclosed_area, equal_area_family

ALIAS_WINDOW = 2.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def record_rng(seed: int, index: int) -> np.random.Generator:
    """Philox stream for one record; independent of how records are scheduled."""
    if seed < 0 or index < 0:
        raise ValidationError("seed and index must be non-negative")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


@dataclass(frozen=True)
class MeasurementRecord:
    area: float
    shots: int
    ups: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError("shots must be >= 1", "shots")
        if not 0 <= self.ups <= self.shots:
            raise ValidationError("ups must lie in [0, shots]", "ups")
        if not self.area >= 0:
            raise ValidationError("area must be >= 0", "area")


def simulate_counts_from_areas(
    gamma: float, areas, shots: int, seed: int, phi0: float = 0.0
) -> list[MeasurementRecord]:
    """Binomial shots with ``P_up = sin^2((gamma A - phi0)/2)`` at each area."""
    if shots < 1:
        raise ValidationError("shots must be >= 1", "shots")
    out = []
    for i, area in enumerate(areas):
        p = math.sin(0.5 * (gamma * area - phi0)) ** 2
        ups = int(record_rng(seed, i).binomial(shots, p))
        out.append(MeasurementRecord(float(area), int(shots), ups))
    return out


def simulate_counts(
    cfg: StaticConfig, pairs: list[PathPair], shots: int, seed: int, tol: float = DEFAULT_TOL
) -> list[MeasurementRecord]:
    """Forward model: area by quadrature, ``P_up`` from the Ramsey readout."""
    out = []
    for i, pair in enumerate(pairs):
        area = enclosed_area(pair, tol)
        if cfg.beta == 1.0:
            p = math.sin(0.5 * cfg.gamma * area) ** 2
        else:
            p = ramsey(evolve_static(cfg, pair, tol))[0]
        ups = int(record_rng(seed, i).binomial(shots, p))
        out.append(MeasurementRecord(area, int(shots), ups))
    return out


def noiseless_records(gamma: float, areas, shots: int, phi0: float = 0.0) -> list[MeasurementRecord]:
    return [
        MeasurementRecord(float(a), shots, int(round(shots * math.sin(0.5 * (gamma * a - phi0)) ** 2)))
        for a in areas
    ]


def write_records_csv(path, records: list[MeasurementRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["area", "shots", "ups"])
        for r in records:
            w.writerow([repr(r.area), r.shots, r.ups])


def read_records_csv(path) -> list[MeasurementRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [MeasurementRecord(float(r["area"]), int(r["shots"]), int(r["ups"])) for r in rows]
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad record CSV {path}: {exc}", "records") from None


@dataclass(frozen=True)
class FitResult:
    gamma_hat: float
    stderr: float
    log_likelihood: float
    aliasing_warning: bool
    n_records: int
    alternatives: tuple = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alternatives"] = [list(a) for a in self.alternatives]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Likelihood:
    def __init__(self, records, phi0):
        self.area = np.array([r.area for r in records], dtype=float)
        self.n = np.array([r.shots for r in records], dtype=float)
        self.k = np.array([r.ups for r in records], dtype=float)
        self.phi0 = phi0

    def __call__(self, gammas):
        g = np.atleast_1d(np.asarray(gammas, dtype=float))[:, None]
        half = 0.5 * (g * self.area - self.phi0)
        s2 = np.sin(half) ** 2
        c2 = np.cos(half) ** 2
        with np.errstate(divide="ignore"):
            ll = np.where(self.k > 0, self.k * np.log(s2), 0.0)
            ll = ll + np.where(self.n > self.k, (self.n - self.k) * np.log(c2), 0.0)
        return ll.sum(axis=1)

    def information(self, gamma):
        """Observed Fisher information ``-d^2 l / d gamma^2``."""
        half = 0.5 * (gamma * self.area - self.phi0)
        s2 = np.sin(half) ** 2
        c2 = np.cos(half) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(self.k > 0, self.k / s2, 0.0)
            dn = np.where(self.n > self.k, (self.n - self.k) / c2, 0.0)
        return float(np.sum(0.5 * self.area**2 * (up + dn)))


def golden_section_max(f, a, b, rtol: float = 1e-8, max_iter: int = 200):
    """Maximize unimodal ``f`` on every bracket ``[a_i, b_i]`` in lockstep.

    ``f`` maps an array of abscissae to an array of values.  Returns
    ``(x, f(x))`` shaped like ``a``; scalar brackets give floats.
    """
    scalar = np.ndim(a) == 0
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        active = np.abs(b - a) > rtol * np.maximum(np.maximum(np.abs(c), np.abs(d)), 1e-300)
        if not np.any(active):
            break
        left = active & (fc >= fd)  # keep [a, d]
        right = active & (fc < fd)  # keep [c, b]
        b = np.where(left, d, b)
        a = np.where(right, c, a)
        c, d, fc, fd = (
            np.where(right, d, c),
            np.where(left, c, d),
            np.where(right, fd, fc),
            np.where(left, fc, fd),
        )
        x_new = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        f_new = f(x_new)
        c = np.where(left, x_new, c)
        fc = np.where(left, f_new, fc)
        d = np.where(right, x_new, d)
        fd = np.where(right, f_new, fd)
    x = np.where(fc >= fd, c, d)
    fx = np.where(fc >= fd, fc, fd)
    if scalar:
        return float(x[0]), float(fx[0])
    return x, fx


def fit_string_tension(
    records: list[MeasurementRecord],
    gamma_range: tuple[float, float] = (1e-3, 5.0),
    grid_points: int = 4001,
    phi0: float = 0.0,
) -> FitResult:
    """Maximum-likelihood ``gamma`` from binomial Ramsey counts.

    A grid scan over ``gamma_range`` locates every local maximum; each one is
    polished by golden-section search to relative tolerance 1e-8.  When a
    second maximum comes within two log-likelihood units of the best, the fit
    is flagged as aliased and the runner-up values are listed.
    """
    if not records:
        raise ContractError("no measurement records")
    if len(records) < 2:
        raise ContractError("at least two records are needed")
    lo, hi = map(float, gamma_range)
    if not hi > lo:
        raise ContractError("gamma_range must have positive length")
    if grid_points < 3:
        raise ContractError("grid_points must be at least 3")
    if sum(r.shots for r in records) == 0:
        raise ContractError("all records have zero shots")
    if all(r.area == 0.0 for r in records):
        raise NonIdentifiableError("every area is zero; the likelihood is flat in gamma")

    like = _Likelihood(records, phi0)
    grid = np.linspace(lo, hi, grid_points)
    ll = like(grid)
    if np.ptp(ll[np.isfinite(ll)]) == 0.0 if np.any(np.isfinite(ll)) else True:
        raise NonIdentifiableError("the likelihood is flat over gamma_range")
    padded = np.concatenate(([-np.inf], ll, [-np.inf]))
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] > padded[2:]))
    # every grid maximum is polished: with many shots the peaks are narrower
    # than the grid spacing, so grid values say little about the true heights
    lo_br = grid[np.maximum(peaks - 1, 0)]
    hi_br = grid[np.minimum(peaks + 1, grid_points - 1)]
    xs, fxs = golden_section_max(like, lo_br, hi_br)
    candidates = sorted(zip(xs.tolist(), fxs.tolist()), key=lambda c: -c[1])
    gamma_hat, best = candidates[0]
    rivals = tuple(c for c in candidates[1:] if c[1] >= best - ALIAS_WINDOW)
    info = like.information(gamma_hat)
    stderr = 1.0 / math.sqrt(info) if info > 0 else math.inf
    return FitResult(gamma_hat, stderr, best, bool(rivals), len(records), rivals)


@dataclass(frozen=True)
class AreaLawReport:
    spread: float
    confining: bool
    phases: tuple
    areas: tuple
    degenerate: bool

    def to_dict(self) -> dict:
        return asdict(self)


def area_law_test(
    cfg: StaticConfig,
    A_target: float,
    n_paths: int,
    seed: int,
    tol: float = 1e-4,
    pairs: list[PathPair] | None = None,
    quad_tol: float = 1e-12,
) -> AreaLawReport:
    """Spread of relative phases across equal-area pairs; small spread means area law.

    ``pairs`` overrides the generated family (used to force degenerate inputs).
    """
    if n_paths < 3:
        raise ContractError("n_paths must be at least 3")
    if pairs is None:
        pairs = equal_area_family(A_target, cfg.x0, cfg.T, n_paths, seed)
    phases = []
    areas = []
    for pair in pairs:
        _, unwrapped = evolve_static(cfg, pair, quad_tol).relative_phase()
        phases.append(float(unwrapped))
        areas.append(float(enclosed_area(pair, quad_tol)))
    spread = max(phases) - min(phases)
    degenerate = all(p == pairs[0] for p in pairs[1:])
    return AreaLawReport(spread, spread < tol, tuple(phases), tuple(areas), degenerate)
