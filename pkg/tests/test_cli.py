"""Command-line interface: config handling, manifests, exit codes, report rollup."""

import hashlib
import json

import numpy as np
import pytest

from younglab.cli import ConfigError, main, parse_config


def run(*argv):
    return main(list(argv))


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def read_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]


def test_config_file_with_flag_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"stat": "ru", "N": 10, "M": 5, "seed": 3, "probes": [0.0, 1.0]}))
    config = parse_config(["sample-static", "--config", str(cfg), "--M", "7"])
    assert config.stat == "ru"
    assert config.n == 10
    assert config.m == 7  # flag beats file
    assert config.seed == 3
    assert config.probes == (0.0, 1.0)


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"stat": "ru", "n_scale": 10}))
    with pytest.raises(ConfigError):
        parse_config(["sample-static", "--config", str(cfg), "--N", "10", "--M", "1"])


def test_missing_required_flags_exit_2(tmp_path, capsys):
    assert run("sample-static", "--output-dir", str(tmp_path)) == 2
    assert "--stat" in capsys.readouterr().err
    assert run("fluct-dynamic", "--stat", "ru", "--N", "10", "--M", "5", "--output-dir", str(tmp_path)) == 2
    assert "--t-end" in capsys.readouterr().err


def test_bad_values_exit_2(tmp_path, capsys):
    base = ("--output-dir", str(tmp_path))
    assert run("sample-static", "--stat", "ru", "--N", "-5", "--M", "3", *base) == 2
    assert run("sample-static", "--stat", "ru", "--N", "5", "--M", "3", "--probes", "1,0.5", *base) == 2
    assert run("solve-pde", "--equation", "heat", "--t-end", "0.1", *base) == 2
    assert run("solve-spde", "--equation", "burgers", "--t-end", "0.1", *base) == 2
    capsys.readouterr()


def test_sample_static_writes_manifest(tmp_path):
    out = tmp_path / "runs"
    assert run("sample-static", "--stat", "ru", "--N", "12", "--M", "200",
               "--seed", "5", "--output-dir", str(out)) == 0
    rows = read_jsonl(out / "samples.jsonl")
    assert len(rows) == 200
    areas = [r["area"] for r in rows]
    assert abs(np.mean(areas) - 144) < 5 * np.std(areas) / np.sqrt(len(areas))
    manifest = read_json(out / "manifest.json")
    assert manifest["command"] == "sample-static"
    assert manifest["config"]["n"] == 12
    assert "spawn_key" in manifest["seed_derivation"]
    digest = hashlib.sha256((out / "samples.jsonl").read_bytes()).hexdigest()
    assert manifest["files"]["samples.jsonl"] == digest


def test_sampling_is_seed_deterministic(tmp_path):
    hashes = []
    for name, seed in (("a", 7), ("b", 7), ("c", 8)):
        out = tmp_path / name
        assert run("sample-static", "--stat", "u", "--N", "10", "--M", "50",
                   "--seed", str(seed), "--output-dir", str(out)) == 0
        hashes.append(read_json(out / "manifest.json")["files"]["samples.jsonl"])
    assert hashes[0] == hashes[1]
    assert hashes[0] != hashes[2]


def test_simulate_records_trajectories(tmp_path):
    out = tmp_path / "runs"
    assert run("simulate", "--stat", "ru", "--N", "10", "--M", "3", "--t-end", "0.05",
               "--probes", "0.02,0.05", "--output-dir", str(out)) == 0
    rows = read_jsonl(out / "trajectories.jsonl")
    assert len(rows) == 6  # 3 trajectories x 2 observer times
    assert {r["t"] for r in rows} == {0.02, 0.05}
    manifest = read_json(out / "manifest.json")
    assert manifest["metrics"]["total_jumps"] > 0


def test_solve_pde_csv_output(tmp_path):
    out = tmp_path / "runs"
    assert run("solve-pde", "--equation", "omega", "--t-end", "0.2", "--du", "0.05",
               "--format", "csv", "--output-dir", str(out)) == 0
    lines = (out / "pde-omega.csv").read_text().strip().splitlines()
    assert lines[0] == "t,u,value"
    # three stored frames over the grid
    n_grid = int(round(10.0 / 0.05)) + 1
    assert len(lines) == 1 + 3 * n_grid
    # full-precision floats round-trip
    t, u, value = lines[1].split(",")
    assert float(t) == 0.0 and float(u) == 0.0
    assert abs(float(value) - 2.0) < 1e-12
    manifest = read_json(out / "manifest.json")
    assert manifest["metrics"]["stationary_drift"] < 1e-3


def test_solve_spde_moments(tmp_path):
    out = tmp_path / "runs"
    assert run("solve-spde", "--equation", "ru", "--t-end", "0.1", "--M", "50",
               "--output-dir", str(out)) == 0
    payload = read_json(out / "spde-ru-moments.json")
    assert payload["n_paths"] == 50
    assert len(payload["variance"]) == len(payload["u"])
    assert max(payload["variance"]) > 0


def test_verify_commands_and_report(tmp_path, capsys):
    out = tmp_path / "runs"
    assert run("verify-rotation", "--M", "100", "--output-dir", str(out)) == 0
    assert run("verify-poincare", "--du", "0.02", "--output-dir", str(out)) == 0
    assert run("verify-green", "--du", "0.02", "--output-dir", str(out)) == 0
    capsys.readouterr()
    assert run("report", "--output-dir", str(out)) == 0
    text = capsys.readouterr().out
    assert "PASS 3/3" not in text  # three files but green/poincare carry sub-reports
    assert text.strip().splitlines()[-1].startswith("PASS ")
    assert "FAIL" not in text


def test_report_empty_directory_exit_2(tmp_path, capsys):
    assert run("report", "--output-dir", str(tmp_path)) == 2
    assert "no reports" in capsys.readouterr().err


def test_fluct_static_exit_codes(tmp_path):
    out = tmp_path / "ok"
    assert run("fluct-static", "--stat", "ru", "--N", "20", "--M", "2000",
               "--output-dir", str(out)) == 0
    payload = read_json(out / "fluct-static-ru.report.json")
    assert payload["passed"] is True
    assert payload["tolerance_scale"] == 1.0
    # squeezing the tolerance to zero must flip the verdict
    out2 = tmp_path / "tight"
    assert run("fluct-static", "--stat", "ru", "--N", "20", "--M", "2000",
               "--tolerance-scale", "0.0", "--output-dir", str(out2)) == 1
    assert read_json(out2 / "fluct-static-ru.report.json")["passed"] is False


def test_fluct_dynamic_small(tmp_path):
    out = tmp_path / "runs"
    assert run("fluct-dynamic", "--stat", "ru", "--N", "15", "--M", "100", "--t-end", "0.05",
               "--output-dir", str(out)) == 0
    payload = read_json(out / "fluct-dynamic-ru.report.json")
    assert payload["passed"] is True
    assert payload["extra"]["total_jumps"] > 0


def test_manifest_omitted_for_report(tmp_path, capsys):
    out = tmp_path / "runs"
    assert run("verify-rotation", "--M", "50", "--output-dir", str(out)) == 0
    manifest_before = (out / "manifest.json").read_bytes()
    assert run("report", "--output-dir", str(out)) == 0
    capsys.readouterr()
    assert (out / "manifest.json").read_bytes() == manifest_before
