import csv
import json
import math
import subprocess
import sys

import pytest

from mesonloop.cli import describe_schema, load_schema, main, run_config, validate_config

QUINTIC = {
    "up": {"family": "QuinticBumpHold", "params": {"D": 1.0, "tau_r": 5.0}},
    "down": {"family": "QuinticBumpHold", "params": {"D": -1.0, "tau_r": 5.0}},
}
DYN = {"m": 1.0, "omega": 5.0, "gamma": 0.1, "x0": 10.0, "T": 20.0}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_static_run_with_resting_paths(tmp_path, capsys):
    cfg = {"schema_version": 1, "scenario": "static-run", "physics": {"gamma": 0.7, "x0": 1.0, "T": 2.0}}
    assert main(["run", write(tmp_path, cfg), "--output-dir", str(tmp_path / "o")]) == 0
    fringe = rows(tmp_path / "o" / "fringe.csv")
    assert len(fringe) == 1 and float(fringe[0]["P_down"]) == 1.0
    assert "static-run" in capsys.readouterr().out


def test_sweep_matches_fringe_law(tmp_path):
    cfg = {"schema_version": 1, "scenario": "sweep", "physics": {"gamma": 0.7, "x0": 10.0, "T": 10.0},
           "sweep": {"workers": 2}}
    run_config(cfg, str(tmp_path / "par"))
    run_config(cfg, str(tmp_path / "seq"), ["sweep.workers=1"])
    got = rows(tmp_path / "par" / "fringe.csv")
    assert list(got[0]) == ["area", "P_up", "P_down", "visibility"]
    assert len(got) == 50
    for r in got:
        assert abs(float(r["P_up"]) - math.sin(0.35 * float(r["area"])) ** 2) <= 1e-12
    assert (tmp_path / "par" / "fringe.csv").read_bytes() == (tmp_path / "seq" / "fringe.csv").read_bytes()


def test_malformed_config_names_the_field(tmp_path, capsys):
    cfg = {"schema_version": 1, "scenario": "static-run", "physics": {"gamma": 0.7, "T": 2.0}}
    assert main(["run", write(tmp_path, cfg)]) == 2
    err = last_json(capsys)
    assert err["field"] == "physics.x0" and err["exit_code"] == 2


@pytest.mark.parametrize("text", ["{not json", "[1, 2]", '{"scenario": "nope", "schema_version": 1}'])
def test_unreadable_configs_exit_2(tmp_path, capsys, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    assert main(["run", str(p)]) == 2


def test_collision_exits_4(tmp_path, capsys):
    cfg = {"schema_version": 1, "scenario": "dynamic-run", "physics": DYN, "paths": QUINTIC}
    assert main(["run", write(tmp_path, cfg), "--output-dir", str(tmp_path),
                 "--set", "paths.down.params.D=-11"]) == 4
    assert last_json(capsys)["kind"] == "collision"


def test_numerical_failure_exits_3(tmp_path, capsys):
    cfg = {"schema_version": 1, "scenario": "estimate", "simulate": {"area_max": 0.0}}
    assert main(["run", write(tmp_path, cfg), "--output-dir", str(tmp_path)]) == 3
    assert last_json(capsys)["error"] == "NonIdentifiableError"


def test_infeasible_family_exits_4(tmp_path, capsys):
    cfg = {"schema_version": 1, "scenario": "area-law-test", "physics": {"gamma": 0.1, "x0": 0.5, "T": 1.0},
           "family": {"A_target": 100.0}}
    assert main(["run", write(tmp_path, cfg), "--output-dir", str(tmp_path)]) == 4


def test_describe(capsys):
    assert main(["describe", "static-run"]) == 0
    text = capsys.readouterr().out
    for key in ("gamma", "x0", "T", "beta", "paths"):
        assert f'"{key}"' in text
    oracle = describe_schema("oracle-check")["properties"]["numerics"]["properties"]
    assert {"n_points", "x_min", "x_max", "dt"} <= set(oracle)
    assert main(["describe", "bogus"]) == 2


def test_every_scenario_is_documented():
    schema = load_schema()
    assert schema["schema_version"] == 1
    assert set(schema["scenarios"]) == set(schema["outputs"]["result_fields"])


def test_defaults_are_filled():
    cfg = validate_config({"schema_version": 1, "scenario": "estimate"})
    assert cfg["simulate"]["shots"] == 10000 and cfg["numerics"]["grid_points"] == 4001


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("MESONLOOP_OUTPUT_DIR", str(tmp_path / "env"))
    cfg = {"schema_version": 1, "scenario": "static-run", "physics": {"gamma": 0.7, "x0": 1.0, "T": 2.0}}
    _, out = run_config(cfg)
    assert out == tmp_path / "env" and (out / "result.json").exists()


def test_results_reproduce_from_their_own_config(tmp_path):
    cfg = {"schema_version": 1, "scenario": "dynamic-run", "physics": DYN, "paths": QUINTIC,
           "numerics": {"ode_dt": 0.01}}
    _, out = run_config(cfg, str(tmp_path / "a"))
    saved = json.loads((out / "result.json").read_text())
    _, again = run_config(saved["config"], str(tmp_path / "b"))
    assert (out / "result.json").read_bytes() == (again / "result.json").read_bytes()
    assert (out / "fringe.csv").read_bytes() == (again / "fringe.csv").read_bytes()


def test_estimate_round_trips_records(tmp_path):
    run_config({"schema_version": 1, "scenario": "estimate", "seed": 3}, str(tmp_path / "sim"))
    refit = {"schema_version": 1, "scenario": "estimate", "records_csv": str(tmp_path / "sim" / "records.csv")}
    run_config(refit, str(tmp_path / "fit"))
    assert (tmp_path / "sim" / "fit.json").read_bytes() == (tmp_path / "fit" / "fit.json").read_bytes()


def test_wilson_and_oracle_outputs(tmp_path):
    w = {"schema_version": 1, "scenario": "wilson-convergence", "physics": {"gamma": 0.5, "x0": 10.0, "T": 10.0},
         "path": {"family": "QuinticBumpHold", "params": {"D": 1.0, "tau_r": 2.0}},
         "numerics": {"N": [10, 100]}}
    run_config(w, str(tmp_path / "w"))
    assert list(rows(tmp_path / "w" / "convergence.csv")[0]) == ["N", "rule", "re", "im", "abs_error"]
    o = {"schema_version": 1, "scenario": "oracle-check",
         "physics": {"m": 1.0, "omega": 2.0, "gamma": 0.1, "x0": 5.0, "T": 3.0},
         "paths": {"up": {"family": "SineFourthBump", "params": {"D": 0.5}},
                   "down": {"family": "SineFourthBump", "params": {"D": -0.5}}},
         "numerics": {"n_points": 256, "richardson": False, "check_modes": False, "snapshot_stride": 100}}
    run_config(o, str(tmp_path / "o"))
    res = json.loads((tmp_path / "o" / "result.json").read_text())["result"]
    assert res["fidelity_up"] > 1 - 1e-5
    snaps = rows(tmp_path / "o" / "snapshots.csv")
    assert list(snaps[0]) == ["t", "x", "re", "im"]


def test_selftest_subset_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        proc = subprocess.run(
            [sys.executable, "-m", "mesonloop", "selftest", "--only", "4,5", "--output-dir", str(tmp_path / name)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert "criterion 8: PASS" in proc.stdout
    for k in (4, 5, 8):
        f = f"criterion_{k}.json"
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
