"""Command-line runner: ``mesonloop run | describe | selftest``.

Exit codes: 0 success, 1 selftest criterion failed, 2 bad config or contract,
3 numerical failure, 4 physics-domain failure.  Failures print one JSON object
on stdout.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels
from .dynamic import DynamicConfig, run_dynamic, solve_branch_ode
from .errors import CollisionError, MesonLoopError, ValidationError
from .estimation import (
    area_law_test,
    fit_string_tension,
    read_records_csv,
    simulate_counts_from_areas,
    write_records_csv,
)
from .oracle import Grid, default_grid, evolve_branch, oracle_check, write_snapshots_csv
from .static import StaticConfig, run_static
from .trajectory import (
    PathPair,
    QuinticBumpHold,
    enclosed_area,
    trajectory_from_dict,
    validate,
    zero_path,
)
from .wilson import continuum_loop, convergence_slope, convergence_table, write_convergence_csv

OUTPUT_ENV = "MESONLOOP_OUTPUT_DIR"


# ---------------------------------------------------------------------------
# schema


def load_schema() -> dict:
    return json.loads(resources.files("mesonloop").joinpath("schema.json").read_text())


def scenario_names() -> list[str]:
    return list(load_schema()["scenarios"])


def _scenario_schema(name: str) -> dict:
    root = load_schema()
    if name not in root["scenarios"]:
        raise ValidationError(
            f"unknown scenario {name!r}; expected one of {sorted(root['scenarios'])}", "scenario"
        )
    return {"$defs": root["$defs"], **root["scenarios"][name]}


def _resolve(node, defs):
    """Inline local ``$ref`` pointers so the schema reads top to bottom."""
    if isinstance(node, dict):
        if "$ref" in node:
            target = {"$defs": defs}
            for part in node["$ref"].lstrip("#/").split("/"):
                target = target[part]
            extra = {k: v for k, v in node.items() if k != "$ref"}
            return {**_resolve(target, defs), **extra}
        return {k: _resolve(v, defs) for k, v in node.items() if k != "$defs"}
    if isinstance(node, list):
        return [_resolve(v, defs) for v in node]
    return node


def describe_schema(name: str) -> dict:
    schema = _scenario_schema(name)
    return _resolve(schema, schema["$defs"])


def _fill_defaults(schema: dict, doc: dict) -> None:
    for key, sub in schema.get("properties", {}).items():
        if key not in doc and "default" in sub:
            doc[key] = copy.deepcopy(sub["default"])
        if isinstance(doc.get(key), dict) and sub.get("type") == "object":
            _fill_defaults(sub, doc[key])


def _error_field(err: jsonschema.ValidationError) -> str:
    path = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        m = re.match(r"'([^']+)'", err.message)
        if m:
            path.append(m.group(1))
    elif err.validator == "additionalProperties":
        m = re.search(r"'([^']+)' was unexpected", err.message)
        if m:
            path.append(m.group(1))
    return ".".join(path) or "<root>"


def validate_config(doc) -> dict:
    """Schema-check a config, then return a copy with every default filled in."""
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object", "<root>")
    if "scenario" not in doc:
        raise ValidationError("'scenario' is a required property", "scenario")
    schema = _scenario_schema(doc["scenario"])
    validator = jsonschema.Draft202012Validator(schema)
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise ValidationError(err.message, _error_field(err))
    resolved = _resolve(schema, schema["$defs"])
    out = copy.deepcopy(doc)
    _fill_defaults(resolved, out)
    return out


def apply_override(doc: dict, assignment: str) -> None:
    """``a.b.c=value``; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ValidationError(f"override {assignment!r} is not of the form key=value", assignment)
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ValidationError(f"override path {key!r} crosses a non-object", key)
    node[parts[-1]] = value


# ---------------------------------------------------------------------------
# output helpers


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _write_fringe(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["area", "P_up", "P_down", "visibility"])
        for r in rows:
            w.writerow([repr(float(r["area"])), repr(float(r["P_up"])), repr(float(r["P_down"])),
                        repr(float(r["visibility"]))])


def _pair(cfg: dict, T: float) -> PathPair:
    docs = []
    for branch in ("up", "down"):
        d = dict(cfg[branch])
        d.setdefault("T", T)
        docs.append(d)
    return PathPair(trajectory_from_dict(docs[0]), trajectory_from_dict(docs[1]))


def _physics(cls, **kw):
    try:
        return cls(**kw)
    except ValidationError as exc:
        raise ValidationError(str(exc), f"physics.{exc.field}" if exc.field else "physics") from None


def _static_cfg(phys: dict) -> StaticConfig:
    return _physics(StaticConfig, gamma=phys["gamma"], x0=phys["x0"], T=phys["T"], beta=phys.get("beta", 1.0))


def _dynamic_cfg(phys: dict) -> DynamicConfig:
    for k in ("m", "omega"):
        if k not in phys:
            raise ValidationError(f"'{k}' is required for the dynamic model", f"physics.{k}")
    return _physics(DynamicConfig, m=phys["m"], omega=phys["omega"], gamma=phys["gamma"], x0=phys["x0"], T=phys["T"])


def _require_valid(pair: PathPair, x0: float) -> None:
    """Sign and smoothness violations are input errors; reaching the static quark is a collision."""
    report = validate(pair, x0)
    if report.ok:
        return
    hits = [v for v in report.violations if v.constraint == "|d_down| < x0"]
    v = (hits or report.violations)[0]
    msg = f"path constraint {v.constraint!r} violated on {v.branch} at t={v.t:.6g} (value {v.value:.6g})"
    if hits:
        raise CollisionError(msg)
    raise ValidationError(msg, f"paths.{v.branch}")


# ---------------------------------------------------------------------------
# scenarios; each returns (summary line, result document)


def _run_static(cfg: dict, out: Path):
    phys = cfg["physics"]
    sc = _static_cfg(phys)
    pair = _pair(cfg["paths"], sc.T) if "paths" in cfg else PathPair(zero_path(sc.T), zero_path(sc.T))
    _require_valid(pair, sc.x0)
    res = run_static(sc, pair, cfg["numerics"]["tol"])
    _write_fringe(out / "fringe.csv", [{**res.to_dict(), "visibility": 1.0}])
    return f"static-run: area={res.area:.12g} P_up={res.P_up:.12g}", res.to_dict()


def _run_dynamic(cfg: dict, out: Path):
    dc = _dynamic_cfg(cfg["physics"])
    pair = _pair(cfg["paths"], dc.T)
    _require_valid(pair, dc.x0)
    run = run_dynamic(dc, pair, cfg["numerics"]["tol"])
    doc = run.to_dict()
    dt = cfg["numerics"]["ode_dt"]
    if dt is not None:
        up = solve_branch_ode(dc, pair.up, dt)
        dn = solve_branch_ode(dc, pair.down, dt)
        doc["ode"] = {"q_up": up.q, "qdot_up": up.q_dot, "q_down": dn.q, "qdot_down": dn.q_dot,
                      "phi0_up": up.phi0, "phi0_down": dn.phi0}
    area = enclosed_area(pair)
    _write_fringe(out / "fringe.csv", [{"area": area, "P_up": run.result.P_up,
                                        "P_down": run.result.P_down, "visibility": run.result.visibility}])
    return (f"dynamic-run: area={area:.12g} P_up={run.result.P_up:.12g} |B|={run.result.visibility:.12g} "
            f"margin={run.margin:.4g}"), doc


def _run_oracle(cfg: dict, out: Path):
    dc = _dynamic_cfg(cfg["physics"])
    pair = _pair(cfg["paths"], dc.T)
    _require_valid(pair, dc.x0)
    num = cfg["numerics"]
    grid = default_grid(dc, [pair.up, pair.down], num["n_points"], num["dt"])
    if num["x_min"] is not None or num["x_max"] is not None:
        grid = Grid(
            float(num["x_min"] if num["x_min"] is not None else grid.x_min),
            float(num["x_max"] if num["x_max"] is not None else grid.x_max),
            grid.n_points,
            grid.dt,
        )
    rep = oracle_check(dc, pair, grid, num["tol"], num["richardson"], num["check_modes"])
    doc = rep.to_dict()
    doc["grid"] = {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points, "dt": grid.dt}
    if num["snapshot_stride"]:
        state = evolve_branch(dc, pair.up, grid, snapshot_stride=num["snapshot_stride"])
        write_snapshots_csv(out / "snapshots.csv", state)
    fid = min(rep.fidelity_up, rep.fidelity_down)
    return f"oracle-check: fidelity={fid:.15g} overlap_error={rep.overlap_error:.3g}", doc


def _run_wilson(cfg: dict, out: Path):
    sc = _static_cfg(cfg["physics"])
    if sc.beta != 1.0:
        raise ValidationError("Wilson loops are defined for the linear potential only", "physics.beta")
    tdoc = dict(cfg["path"])
    tdoc.setdefault("T", sc.T)
    traj = trajectory_from_dict(tdoc)
    num = cfg["numerics"]
    rows = convergence_table(sc.gamma, sc.x0, traj, num["N"], num["rules"], num["tol"])
    write_convergence_csv(out / "convergence.csv", rows)
    exact = continuum_loop(sc.gamma, sc.x0, traj, num["tol"])
    slopes = {r: convergence_slope(rows, r) for r in num["rules"]} if len(num["N"]) > 1 else {}
    doc = {"continuum": exact, "slopes": slopes}
    worst = max(r.abs_error for r in rows)
    return f"wilson-convergence: {len(rows)} rows, max abs_error={worst:.3g}", doc


def _run_estimate(cfg: dict, out: Path):
    num = cfg["numerics"]
    if cfg["records_csv"]:
        records = read_records_csv(cfg["records_csv"])
    else:
        sim = cfg["simulate"]
        if sim["area_max"] < sim["area_min"]:
            raise ValidationError("area_max must be >= area_min", "simulate.area_max")
        rng = np.random.Generator(np.random.Philox(key=cfg["seed"] << 64))
        areas = rng.uniform(sim["area_min"], sim["area_max"], sim["n_areas"])
        records = simulate_counts_from_areas(sim["gamma"], areas, sim["shots"], cfg["seed"] + 1)
    write_records_csv(out / "records.csv", records)
    fit = fit_string_tension(records, (num["gamma_min"], num["gamma_max"]), num["grid_points"], num["phi0"])
    (out / "fit.json").write_text(fit.to_json() + "\n")
    flag = " (aliasing)" if fit.aliasing_warning else ""
    return f"estimate: gamma_hat={fit.gamma_hat:.10g} +/- {fit.stderr:.3g}{flag}", {"fit": fit.to_dict()}


def _run_area_law(cfg: dict, out: Path):
    sc = _static_cfg(cfg["physics"])
    fam = cfg["family"]
    rep = area_law_test(sc, fam["A_target"], fam["n_paths"], cfg["seed"], cfg["numerics"]["tol"])
    with open(out / "family.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "area", "phase"])
        for i, (a, p) in enumerate(zip(rep.areas, rep.phases)):
            w.writerow([i, repr(a), repr(p)])
    label = "confining" if rep.confining else "not confining"
    return f"area-law-test: spread={rep.spread:.3g} ({label})", rep.to_dict()


def sweep_pair(area: float, T: float, tau_fraction: float) -> PathPair:
    """Mirror-symmetric quintic pair enclosing ``area``."""
    tau = tau_fraction * T
    D = area / (2.0 * (T - tau))
    return PathPair(QuinticBumpHold(D=D, tau_r=tau, T=T), QuinticBumpHold(D=-D, tau_r=tau, T=T))


def _sweep_point(job):
    area, phys, model, tau_fraction, tol = job
    pair = sweep_pair(area, phys["T"], tau_fraction)
    _require_valid(pair, phys["x0"])
    if model == "static":
        res = run_static(_static_cfg(phys), pair, tol)
        return {"area": res.area, "P_up": res.P_up, "P_down": res.P_down, "visibility": 1.0}
    run = run_dynamic(_dynamic_cfg(phys), pair, tol)
    return {"area": enclosed_area(pair), "P_up": run.result.P_up, "P_down": run.result.P_down,
            "visibility": run.result.visibility}


def _run_sweep(cfg: dict, out: Path):
    sw = cfg["sweep"]
    phys = cfg["physics"]
    if sw["areas"] is not None:
        areas = [float(a) for a in sw["areas"]]
    else:
        areas = np.linspace(sw["area_min"], sw["area_max"], sw["n_areas"]).tolist()
    if sw["model"] == "dynamic":
        _dynamic_cfg(phys)
    jobs = [(a, phys, sw["model"], sw["tau_fraction"], cfg["numerics"]["tol"]) for a in areas]
    if sw["workers"] > 1:
        with ProcessPoolExecutor(max_workers=sw["workers"]) as pool:
            rows = list(pool.map(_sweep_point, jobs))  # map keeps input order
    else:
        rows = [_sweep_point(j) for j in jobs]
    _write_fringe(out / "fringe.csv", rows)
    return f"sweep: {len(rows)} points ({sw['model']})", {"rows": rows}


RUNNERS = {
    "static-run": _run_static,
    "dynamic-run": _run_dynamic,
    "oracle-check": _run_oracle,
    "wilson-convergence": _run_wilson,
    "estimate": _run_estimate,
    "area-law-test": _run_area_law,
    "sweep": _run_sweep,
}


def run_config(doc: dict, output_dir: str | None = None, overrides=()) -> tuple[str, Path]:
    """Validate, run and write one experiment; returns (summary, output directory)."""
    doc = copy.deepcopy(doc)
    for o in overrides:
        apply_override(doc, o)
    cfg = validate_config(doc)
    out = Path(output_dir or os.environ.get(OUTPUT_ENV) or cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    summary, result = RUNNERS[cfg["scenario"]](cfg, out)
    _dump(out / "result.json", {"scenario": cfg["scenario"], "config": cfg, "result": result})
    return summary, out


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc.strerror}", "config") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}", "config") from None


def _fail(exc: MesonLoopError) -> int:
    doc = {
        "error": type(exc).__name__,
        "kind": exc.kind,
        "exit_code": exc.exit_code,
        "message": str(exc),
        "field": getattr(exc, "field", None),
    }
    print(json.dumps(doc, sort_keys=True))
    return exc.exit_code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mesonloop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--output-dir", help=f"overrides the config and ${OUTPUT_ENV}")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. physics.gamma=0.5")
    d = sub.add_parser("describe", help="print a scenario's config schema with defaults")
    d.add_argument("scenario")
    s = sub.add_parser("selftest", help="run the acceptance suite")
    s.add_argument("--output-dir")
    s.add_argument("--only", help="comma-separated criterion numbers (1-7); 8 always runs")
    s.add_argument("--no-rerun", action="store_true", help=argparse.SUPPRESS)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            summary, _ = run_config(_load_config(args.config), args.output_dir, args.set)
            print(summary)
            return 0
        if args.command == "describe":
            print(json.dumps(describe_schema(args.scenario), indent=2))
            return 0
        from .acceptance import run_suite

        which = None
        if args.only:
            try:
                which = [int(k) for k in args.only.split(",") if k.strip()]
            except ValueError:
                raise ValidationError(f"--only expects integers, got {args.only!r}", "only") from None
            if any(k not in range(1, 9) for k in which):
                raise ValidationError("criteria are numbered 1-8", "only")
        print(f"kernel backend: {kernels.BACKEND}")
        results = run_suite(args.output_dir, which, rerun=not args.no_rerun)
        return 0 if all(r.ok for r in results) else 1
    except MesonLoopError as exc:
        return _fail(exc)
    except (ArithmeticError, FloatingPointError) as exc:
        print(json.dumps({"error": type(exc).__name__, "kind": "numerical", "exit_code": 3,
                          "message": str(exc), "field": None}, sort_keys=True))
        return 3


if __name__ == "__main__":
    sys.exit(main())
