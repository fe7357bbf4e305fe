"""Acceptance suite: eight pass/fail checks with deterministic result files.

Every criterion returns a :class:`CriterionResult`.  Metrics go into
``criterion_<k>.json`` with sorted keys and ``repr``-exact floats; wall-clock
time is only printed, so two runs write identical bytes.
"""
from __future__ import annotations

import filecmp
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .dynamic import (
    DynamicConfig,
    gamma_phase_difference,
    run_dynamic,
    solve_branch,
    solve_branch_ode,
)
from .estimation import (
    area_law_test,
    fit_string_tension,
    noiseless_records,
    simulate_counts_from_areas,
)
from .oracle import oracle_check
from .static import StaticConfig, run_static
from .trajectory import PathPair, QuinticBumpHold, SineFourthBump, random_pair
from .wilson import Rule, amplitude_correspondence, convergence_slope, convergence_table

SEED = 20240601
PHASE_FIELDS = ("phi0_tilde", "phi0", "gamma_phase", "total_phase")


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict
    runtime_limit: float | None = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def within_budget(self) -> bool:
        return self.runtime_limit is None or self.elapsed < self.runtime_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        clock = f" [{self.elapsed:.2f} s"
        if self.runtime_limit is not None:
            clock += f" of {self.runtime_limit:g} s budget"
        return f"criterion {self.number}: {status}  {self.title}{clock}]"

    def to_json(self) -> str:
        doc = {"criterion": self.number, "title": self.title, "passed": self.passed, "metrics": self.metrics}
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _rng(stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(SEED << 64) | stream))


def standard_scenario() -> tuple[DynamicConfig, PathPair]:
    cfg = DynamicConfig(m=1.0, omega=5.0, gamma=0.1, x0=10.0, T=20.0)
    pair = PathPair(
        QuinticBumpHold(D=1.0, tau_r=5.0, T=20.0),
        QuinticBumpHold(D=-1.0, tau_r=5.0, T=20.0),
    )
    return cfg, pair


def random_dynamic_scenario(rng: np.random.Generator) -> tuple[DynamicConfig, PathPair]:
    """Random quintic/sine scenario in the ranges the oracle comparison covers."""
    m = float(rng.uniform(0.5, 2.0))
    omega = float(rng.uniform(1.0, 5.0))
    x0 = float(rng.uniform(2.0, 10.0))
    T = float(rng.uniform(5.0, 20.0))
    gamma = float(rng.uniform(0.01, 0.5)) * m * omega**2 * x0
    cfg = DynamicConfig(m=m, omega=omega, gamma=gamma, x0=x0, T=T)
    trajs = []
    for sign in (1.0, -1.0):
        D = sign * float(rng.uniform(0.2, min(1.5, 0.9 * x0)))
        if rng.integers(2):
            trajs.append(QuinticBumpHold(D=D, tau_r=float(rng.uniform(0.1, 0.5)) * T, T=T))
        else:
            trajs.append(SineFourthBump(D=D, T=T))
    return cfg, PathPair(*trajs)


def _quad_area(pair: PathPair) -> float:
    """Area by adaptive Gauss-Kronrod, independent of the package quadrature."""
    pts = pair.breakpoints()
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(
            lambda t: float(pair.up.evaluate(t)[0] - pair.down.evaluate(t)[0]),
            lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200,
        )
        total += val
    return total


def criterion_1() -> CriterionResult:
    rng = _rng(1)
    worst = 0.0
    n = 0
    for _ in range(200):
        x0 = float(rng.uniform(1.0, 10.0))
        T = float(rng.uniform(1.0, 20.0))
        pair = random_pair(rng, x0, T)
        area = _quad_area(pair)
        for gamma in (0.1, 0.7, 2.0):
            res = run_static(StaticConfig(gamma=gamma, x0=x0, T=T), pair)
            worst = max(worst, abs(res.P_up - math.sin(0.5 * gamma * area) ** 2))
            n += 1
    return CriterionResult(
        1, "static fringe law", worst <= 1e-10,
        {"cases": n, "max_abs_error": worst, "tolerance": 1e-10}, runtime_limit=5.0,
    )


def criterion_2() -> CriterionResult:
    rng = _rng(2)
    worst_q = worst_phase = 0.0
    for _ in range(50):
        cfg, pair = random_dynamic_scenario(rng)
        for traj in (pair.up, pair.down):
            green = solve_branch(cfg, traj, 1e-11)
            ode = solve_branch_ode(cfg, traj, 0.001 / cfg.omega)
            worst_q = max(worst_q, abs(green.q - ode.q), abs(green.q_dot - ode.q_dot))
            for name in PHASE_FIELDS:
                worst_phase = max(worst_phase, abs(getattr(green, name) - getattr(ode, name)))
    return CriterionResult(
        2, "Green's function vs ODE", worst_q <= 1e-8 and worst_phase <= 1e-8,
        {"scenarios": 50, "max_state_error": worst_q, "max_phase_error": worst_phase, "tolerance": 1e-8},
        runtime_limit=10.0,
    )


def criterion_3() -> CriterionResult:
    cfg, pair = standard_scenario()
    rep = oracle_check(cfg, pair)
    fid = min(rep.fidelity_up, rep.fidelity_down)
    phase = max(rep.phase_error_up, rep.phase_error_down)
    ok = fid >= 1.0 - 1e-6 and phase <= 1e-6 and rep.overlap_error <= 1e-6
    metrics = {
        "min_fidelity": fid,
        "max_phase_error": phase,
        "overlap_error": rep.overlap_error,
        "mode_phase_error": rep.mode_phase_error,
        "P_up_numeric": rep.P_up_numeric,
        "P_up_analytic": rep.P_up_analytic,
    }
    return CriterionResult(3, "Schrodinger oracle gate", ok, metrics, runtime_limit=60.0)


def visibility_scenarios():
    """(label, cfg, pair) cases spanning tiny to large adiabaticity margins."""
    slow = DynamicConfig(m=1.0, omega=50.0, gamma=0.1, x0=10.0, T=20.0)
    fast = DynamicConfig(m=1.0, omega=1.0, gamma=0.1, x0=10.0, T=10.0)
    return [
        ("slow", slow, PathPair(QuinticBumpHold(D=0.02, tau_r=9.0, T=20.0),
                                QuinticBumpHold(D=-0.02, tau_r=9.0, T=20.0))),
        ("fast", fast, PathPair(QuinticBumpHold(D=2.0, tau_r=1.0, T=10.0),
                                QuinticBumpHold(D=-2.0, tau_r=1.0, T=10.0))),
        ("standard", *standard_scenario()),
    ]


def criterion_4() -> CriterionResult:
    rng = _rng(4)
    cases = visibility_scenarios() + [("random", *random_dynamic_scenario(rng)) for _ in range(20)]
    worst_law = 0.0
    slow_ok = fast_ok = True
    slow_seen = fast_seen = 0
    for label, cfg, pair in cases:
        run = run_dynamic(cfg, pair)
        law = math.exp(-0.5 * abs(run.up.alpha - run.down.alpha) ** 2)
        worst_law = max(worst_law, abs(abs(run.result.B) - law))
        if run.margin < 0.01:
            slow_seen += 1
            slow_ok &= abs(run.result.B) >= 0.9999
        if run.margin > 1.0 and label == "fast":
            fast_seen += 1
            fast_ok &= abs(run.result.B) < 0.99
    ok = worst_law <= 1e-12 and slow_ok and fast_ok and slow_seen > 0 and fast_seen > 0
    metrics = {
        "scenarios": len(cases),
        "max_law_error": worst_law,
        "slow_cases": slow_seen,
        "slow_visibility_ok": slow_ok,
        "fast_cases": fast_seen,
        "fast_visibility_loss_ok": fast_ok,
    }
    return CriterionResult(4, "visibility law", ok, metrics)


def criterion_5() -> CriterionResult:
    rng = _rng(5)
    worst_lin = 0.0
    for _ in range(10):
        cfg, pair = random_dynamic_scenario(rng)
        g1 = cfg.gamma
        g2 = g1 * float(rng.uniform(0.2, 0.9))
        c2 = DynamicConfig(m=cfg.m, omega=cfg.omega, gamma=g2, x0=cfg.x0, T=cfg.T)
        r1 = run_dynamic(cfg, pair).result
        r2 = run_dynamic(c2, pair).result
        area = _quad_area(pair)
        worst_lin = max(worst_lin, abs(gamma_phase_difference(r2, r1, pair) + (g2 - g1) * area))
    base = dict(gamma=0.1, x0=10.0, T=10.0)
    lin = area_law_test(StaticConfig(**base, beta=1.0), 16.0, 5, SEED, tol=1e-4)
    sq = area_law_test(StaticConfig(**base, beta=2.0), 16.0, 5, SEED, tol=1e-4)
    ok = worst_lin <= 1e-9 and lin.spread <= 1e-8 and sq.spread >= 1e-2 and lin.confining and not sq.confining
    metrics = {
        "max_linearity_error": worst_lin,
        "spread_beta1": lin.spread,
        "spread_beta2": sq.spread,
        "confining_beta1": lin.confining,
        "confining_beta2": sq.confining,
    }
    return CriterionResult(5, "gamma linearity and area law", ok, metrics)


def criterion_6() -> CriterionResult:
    rng = _rng(6)
    worst = 0.0
    for _ in range(20):
        x0 = float(rng.uniform(1.0, 10.0))
        T = float(rng.uniform(1.0, 20.0))
        gamma = float(rng.uniform(0.05, 2.0))
        rep = amplitude_correspondence(StaticConfig(gamma=gamma, x0=x0, T=T), random_pair(rng, x0, T))
        worst = max(worst, rep.deviation)
    traj = QuinticBumpHold(D=1.0, tau_r=2.0, T=10.0)
    rows = convergence_table(0.5, 10.0, traj, Ns=(100, 1000, 10000))
    s_left = convergence_slope(rows, Rule.LEFT)
    s_mid = convergence_slope(rows, Rule.MIDPOINT)
    ok = worst <= 1e-9 and abs(s_left - 1.0) <= 0.2 and abs(s_mid - 2.0) <= 0.2
    metrics = {
        "max_correspondence_deviation": worst,
        "slope_left": s_left,
        "slope_midpoint": s_mid,
        "errors": {f"{r.rule}_{r.N}": r.abs_error for r in rows},
    }
    return CriterionResult(6, "Wilson correspondence and discretization order", ok, metrics)


def criterion_7() -> CriterionResult:
    gamma = 0.7
    areas = _rng(7).uniform(0.0, 8.0, 50)
    covered = 0
    for rep in range(100):
        fit = fit_string_tension(simulate_counts_from_areas(gamma, areas, 10_000, SEED + rep))
        covered += abs(fit.gamma_hat - gamma) <= 3.0 * fit.stderr
    clean = fit_string_tension(noiseless_records(gamma, areas, 1_000_000))
    err = abs(clean.gamma_hat - gamma)
    return CriterionResult(
        7, "string-tension estimation", covered >= 95 and err <= 1e-3,
        {"replications": 100, "covered_3sigma": covered, "noiseless_error": err},
        runtime_limit=30.0,
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
}


def run_criterion(k: int) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[k]()
    res.elapsed = time.perf_counter() - t0
    return res


def _write(out_dir: Path, res: CriterionResult) -> None:
    (out_dir / f"criterion_{res.number}.json").write_text(res.to_json())


def _run_files(out_dir: Path, which, echo) -> list[CriterionResult]:
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for k in which:
        res = run_criterion(k)
        # elapsed time is machine-dependent and stays out of the file
        _write(out_dir, res)
        results.append(res)
        if echo:
            print(res.line(), flush=True)
    return results


def determinism_check(first_dir: Path, which, echo=False) -> CriterionResult:
    """Run ``selftest`` again in a fresh interpreter and compare result bytes."""
    t0 = time.perf_counter()
    names = sorted(f"criterion_{k}.json" for k in which)
    with tempfile.TemporaryDirectory() as tmp:
        cmd = [sys.executable, "-m", "mesonloop", "selftest", "--output-dir", tmp,
               "--only", ",".join(map(str, which)), "--no-rerun"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        match, mismatch, errors = filecmp.cmpfiles(first_dir, tmp, names, shallow=False)
    ok = proc.returncode in (0, 1) and not mismatch and not errors and len(match) == len(names)
    res = CriterionResult(
        8, "determinism (byte-identical second selftest)", ok,
        {"files": names, "mismatched": sorted(mismatch + errors)},
    )
    res.elapsed = time.perf_counter() - t0
    if echo:
        print(res.line(), flush=True)
    return res


def run_suite(output_dir=None, which=None, echo: bool = True, rerun: bool = True) -> list[CriterionResult]:
    """Run criteria 1-7 (or ``which``), then the byte-identity rerun as 8."""
    which = sorted(CRITERIA) if which is None else sorted(set(which) - {8})
    out = Path(output_dir or os.environ.get("MESONLOOP_OUTPUT_DIR") or "selftest_results")
    results = _run_files(out, which, echo)
    if rerun:
        results.append(determinism_check(out, which, echo))
        _write(out, results[-1])
    if echo:
        n_pass = sum(r.ok for r in results)
        print(f"{n_pass}/{len(results)} criteria passed", flush=True)
    return results
