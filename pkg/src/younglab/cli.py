"""Command-line driver: experiment configs, reproducibility manifests, reports.

Every run writes its outputs plus a ``manifest.json`` recording the resolved
configuration, package version, per-trajectory seed derivation rule, timing
and jump-count metrics, and a sha256 checksum of each emitted file.  Exit
codes: 0 success/verification pass, 1 verification failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .dynamics import derive_seed, simulate
from .ensembles import (
    EnsembleError,
    GrandcanonicalParams,
    Stat,
    diagram_from_differences,
    sample_height_differences,
    vershik_curve,
)
from .fluctlab import (
    green_kernel_solve,
    poincare_constant,
    run_dynamic_experiment,
    run_static_experiment,
)
from .pde import (
    TimeProfiles,
    omega_infinity,
    rho_infinity_line,
    solve_burgers,
    solve_omega,
    solve_psi_ru,
    solve_psi_u,
    solve_rho_u,
    stationarity_drift,
    stationary_profile,
)
from .spde import integrate_spde, line_system, phi_bar_system, ru_system, u_system
from .transforms import rotated_height, rotated_height_counting

SEED_RULE = "trajectory i uses SeedSequence(entropy=seed, spawn_key=(i,)); initial states use spawn_key=(1, i)"

COMMANDS = (
    "sample-static",
    "simulate",
    "solve-pde",
    "solve-spde",
    "fluct-static",
    "fluct-dynamic",
    "verify-green",
    "verify-poincare",
    "verify-rotation",
    "verify-stationary",
    "report",
)

PDE_EQUATIONS = ("burgers", "omega", "psi-u", "psi-ru", "rho-u")
SPDE_EQUATIONS = ("ru", "u", "line", "phi-bar")

CONFIG_KEYS = {
    "command": "command",
    "stat": "stat",
    "N": "n",
    "M": "m",
    "t_end": "t_end",
    "dt": "dt",
    "du": "du",
    "probes": "probes",
    "seed": "seed",
    "output_dir": "output_dir",
    "format": "format",
    "equation": "equation",
    "route": "route",
    "tolerance_scale": "tolerance_scale",
    "workers": "workers",
}


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass
class RunConfig:
    command: str
    stat: str | None = None
    n: int | None = None
    m: int | None = None
    t_end: float | None = None
    dt: float | None = None
    du: float | None = None
    probes: tuple | None = None
    seed: int = 0
    output_dir: str | None = None
    format: str = "jsonl"
    equation: str | None = None
    route: str = "direct"
    tolerance_scale: float = 1.0
    workers: int | None = None

    @property
    def kind(self) -> Stat:
        return Stat.U if self.stat == "u" else Stat.RU


_REQUIRED = {
    "sample-static": ("stat", "n", "m"),
    "simulate": ("stat", "n", "t_end"),
    "solve-pde": ("equation", "t_end"),
    "solve-spde": ("equation", "t_end"),
    "fluct-static": ("stat", "n", "m"),
    "fluct-dynamic": ("stat", "n", "m", "t_end"),
    "verify-green": (),
    "verify-poincare": (),
    "verify-rotation": (),
    "verify-stationary": (),
    "report": (),
}


def _parse_probes(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"cannot parse probes list {text!r}") from exc


def parse_config(argv=None) -> RunConfig:
    """Build a RunConfig from a JSON config file plus overriding flags."""
    ap = argparse.ArgumentParser(prog="younglab", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON config file; flags override its values")
    ap.add_argument("--stat", choices=("u", "ru"))
    ap.add_argument("--N", dest="n", type=int, help="diagram scale (mean area N^2)")
    ap.add_argument("--M", dest="m", type=int, help="sample/path/trajectory count")
    ap.add_argument("--t-end", dest="t_end", type=float)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--du", type=float)
    ap.add_argument("--probes", type=str, help="comma-separated probe points (or observer times for simulate)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output-dir", dest="output_dir")
    ap.add_argument("--format", choices=("csv", "jsonl"))
    ap.add_argument("--equation", help="pde: burgers|omega|psi-u|psi-ru|rho-u; spde: ru|u|line|phi-bar")
    ap.add_argument("--route", choices=("direct", "via_omega"))
    ap.add_argument("--tolerance-scale", dest="tolerance_scale", type=float)
    ap.add_argument("--workers", type=int)
    args = ap.parse_args(argv)

    merged: dict = {"command": args.command}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in raw.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            field = CONFIG_KEYS[key]
            if field == "probes":
                value = tuple(float(v) for v in value)
            merged[field] = value
    for field in (
        "stat", "n", "m", "t_end", "dt", "du", "seed", "output_dir",
        "format", "equation", "route", "tolerance_scale", "workers",
    ):
        val = getattr(args, field)
        if val is not None:
            merged[field] = val
    if args.probes is not None:
        merged["probes"] = _parse_probes(args.probes)

    config = RunConfig(**merged)
    _validate(config)
    return config


_FLAG_NAMES = {"stat": "--stat", "n": "--N", "m": "--M", "t_end": "--t-end", "equation": "--equation"}


def _validate(config: RunConfig) -> None:
    if config.command not in _REQUIRED:
        raise ConfigError(f"unknown command {config.command!r}")
    for field in _REQUIRED[config.command]:
        if getattr(config, field) is None:
            raise ConfigError(f"{config.command} requires {_FLAG_NAMES[field]}")
    if config.stat is not None and config.stat not in ("u", "ru"):
        raise ConfigError("stat must be 'u' or 'ru'")
    for field in ("n", "m"):
        val = getattr(config, field)
        if val is not None and val <= 0:
            raise ConfigError(f"{field.upper()} must be positive")
    for field in ("t_end", "dt", "du", "tolerance_scale"):
        val = getattr(config, field)
        if val is not None and val < 0:
            raise ConfigError(f"{field} must be nonnegative")
    if config.workers is not None and config.workers <= 0:
        raise ConfigError("workers must be positive")
    if config.format not in ("csv", "jsonl"):
        raise ConfigError("format must be csv or jsonl")
    if config.probes is not None:
        probes = tuple(config.probes)
        if len(probes) == 0:
            raise ConfigError("probes list must not be empty")
        if any(b <= a for a, b in zip(probes, probes[1:])):
            raise ConfigError("probes must be strictly increasing")
    if config.command == "solve-pde" and config.equation not in PDE_EQUATIONS:
        raise ConfigError(f"solve-pde equation must be one of {PDE_EQUATIONS}")
    if config.command == "solve-spde" and config.equation not in SPDE_EQUATIONS:
        raise ConfigError(f"solve-spde equation must be one of {SPDE_EQUATIONS}")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class _Out:
    """Collects emitted files so the manifest can checksum them."""

    def __init__(self, directory: str):
        self.directory = directory
        self.files: list[str] = []
        os.makedirs(directory, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.directory, name)
        self.files.append(p)
        return p

    def write_json(self, name: str, payload) -> str:
        p = self.path(name)
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p

    def write_jsonl(self, name: str, rows) -> str:
        p = self.path(name)
        with open(p, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True))
                fh.write("\n")
        return p

    def write_csv(self, name: str, header: list[str], rows) -> str:
        p = self.path(name)
        with open(p, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
        return p


def _frames_out(out: _Out, config: RunConfig, flow: TimeProfiles, stem: str) -> None:
    u = flow.u
    if config.format == "csv":
        rows = []
        for k, t in enumerate(flow.times):
            for j in range(u.size):
                rows.append((float(t), float(u[j]), float(flow.frames[k, j])))
        out.write_csv(f"{stem}.csv", ["t", "u", "value"], rows)
    else:
        rows = (
            {"t": float(t), "grid_start": flow.grid_start, "grid_step": flow.grid_step,
             "values": [float(v) for v in flow.frames[k]]}
            for k, t in enumerate(flow.times)
        )
        out.write_jsonl(f"{stem}.jsonl", rows)


def _cmd_sample_static(config: RunConfig, out: _Out):
    kind = config.kind
    params = GrandcanonicalParams.for_scale(kind, config.n)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    areas = []
    rows = []
    for i in range(config.m):
        d = diagram_from_differences(sample_height_differences(params, kind, rng)[0])
        areas.append(d.area)
        rows.append({"index": i, "area": d.area, "columns": [int(c) for c in d.columns]})
    if config.format == "csv":
        out.write_csv(
            "samples.csv", ["index", "area", "columns"],
            ((r["index"], r["area"], " ".join(str(c) for c in r["columns"])) for r in rows),
        )
    else:
        out.write_jsonl("samples.jsonl", rows)
    metrics = {"epsilon": params.epsilon, "mean_area": float(np.mean(areas)), "target_area": config.n**2}
    return None, metrics


def _cmd_simulate(config: RunConfig, out: _Out):
    kind = config.kind
    params = GrandcanonicalParams.for_scale(kind, config.n)
    times = sorted(config.probes) if config.probes else [config.t_end]
    if times[-1] > config.t_end + 1e-12:
        raise ConfigError("observer times must not exceed t_end")
    m = config.m or 1
    rows = []
    jumps = 0
    for i in range(m):
        rng_i = np.random.default_rng(np.random.SeedSequence(entropy=config.seed, spawn_key=(1, i)))
        d0 = diagram_from_differences(sample_height_differences(params, kind, rng_i)[0])
        rec = simulate(d0, kind, params.epsilon, config.n, config.t_end, times, seed=derive_seed(config.seed, i))
        jumps += rec.jump_count
        for t, snap in zip(rec.times, rec.snapshots):
            rows.append({"trajectory": i, "t": float(t), "columns": [int(c) for c in snap.columns]})
    if config.format == "csv":
        out.write_csv(
            "trajectories.csv", ["trajectory", "t", "columns"],
            ((r["trajectory"], float(r["t"]), " ".join(str(c) for c in r["columns"])) for r in rows),
        )
    else:
        out.write_jsonl("trajectories.jsonl", rows)
    return None, {"epsilon": params.epsilon, "total_jumps": jumps, "trajectories": m}


_PDE_GRIDS = {
    "burgers": (-10.0, 10.0, 0.02),
    "omega": (0.0, 10.0, 0.02),
    "psi-u": (0.1, 9.0, 0.01),
    "psi-ru": (0.0, 10.0, 0.01),
    "rho-u": (0.1, 8.0, 0.01),
}


def _cmd_solve_pde(config: RunConfig, out: _Out):
    lo, hi, du0 = _PDE_GRIDS[config.equation]
    du = config.du or du0
    n = int(round((hi - lo) / du)) + 1
    grid = lo + du * np.arange(n)
    stops = [0.0, 0.5 * config.t_end, config.t_end]
    if config.equation == "burgers":
        flow = solve_burgers(stationary_profile("rho_line", grid), config.t_end, dt=config.dt, store_times=stops)
    elif config.equation == "omega":
        flow = solve_omega(stationary_profile("omega", grid), config.t_end, dt=config.dt, store_times=stops)
    elif config.equation == "psi-u":
        flow = solve_psi_u(stationary_profile("psi_u", grid), config.t_end, dt=config.dt, store_times=stops)
    elif config.equation == "psi-ru":
        flow = solve_psi_ru(
            stationary_profile("psi_ru", grid), config.t_end, dt=config.dt, store_times=stops, route=config.route
        )
    else:
        flow = solve_rho_u(stationary_profile("rho_u", grid), config.t_end, dt=config.dt, store_times=stops)
    _frames_out(out, config, flow, f"pde-{config.equation}")
    drift = float(np.max(np.abs(flow.frames - flow.frames[0])))
    return None, {"equation": config.equation, "du": du, "stationary_drift": drift}


def _cmd_solve_spde(config: RunConfig, out: _Out):
    m = config.m or 100
    if config.equation == "ru":
        du = config.du or 0.1
        u = du * np.arange(int(round(8.0 / du)) + 1)
        system = ru_system(vershik_curve(Stat.RU, u)[1], u_min=0.0, u_max=8.0, du=du)
    elif config.equation == "u":
        du = config.du or 0.05
        u = 0.05 + du * np.arange(int(round((8.0 - 0.05) / du)) + 1)
        system = u_system(vershik_curve(Stat.U, u)[1], u_min=0.05, u_max=8.0, du=du)
    elif config.equation == "line":
        du = config.du or 0.1
        v = -8.0 + du * np.arange(int(round(16.0 / du)) + 1)
        system = line_system(rho_infinity_line(v), v_min=-8.0, v_max=8.0, du=du)
    else:
        du = config.du or 0.1
        system = phi_bar_system(omega_infinity, lambda au: vershik_curve(Stat.RU, au)[1], v_max=8.0, du=du)
    dt = config.dt or 0.05 * du * du
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    res = integrate_spde(system, config.t_end, dt, n_paths=m, rng=rng, store_times=[config.t_end])
    final = res.final_values
    payload = {
        "equation": config.equation,
        "t_end": config.t_end,
        "n_paths": m,
        "u": [float(x) for x in res.u],
        "mean": [float(x) for x in final.mean(axis=0)],
        "variance": [float(x) for x in final.var(axis=0, ddof=1)],
    }
    out.write_json(f"spde-{config.equation}-moments.json", payload)
    return None, {"equation": config.equation, "du": du, "dt": dt, "n_paths": m}


def _scaled_pass(report, scale: float) -> bool:
    dev = np.abs(report.empirical - report.theoretical)
    ok = bool(np.all(dev <= scale * report.tolerance))
    if report.mean_empirical is not None and report.mean_predicted is not None:
        ok = ok and bool(
            np.all(np.abs(report.mean_empirical - report.mean_predicted) <= scale * 4.0 * report.mean_standard_error)
        )
    return ok


def _cmd_fluct_static(config: RunConfig, out: _Out):
    report = run_static_experiment(config.kind, config.n, config.m, probes=config.probes, seed=config.seed)
    passed = report.passed if config.tolerance_scale == 1.0 else _scaled_pass(report, config.tolerance_scale)
    payload = report.to_dict()
    payload["passed"] = passed
    payload["tolerance_scale"] = config.tolerance_scale
    out.write_json(f"fluct-static-{config.stat}.report.json", payload)
    return passed, {"max_z_score": report.max_z_score}


def _cmd_fluct_dynamic(config: RunConfig, out: _Out):
    report = run_dynamic_experiment(
        config.kind, config.n, config.m, config.t_end,
        probes=config.probes, seed=config.seed, du=config.du or 0.1,
        workers=config.workers or int(os.environ.get("YOUNGLAB_WORKERS", "1")),
    )
    passed = report.passed if config.tolerance_scale == 1.0 else _scaled_pass(report, config.tolerance_scale)
    payload = report.to_dict()
    payload["passed"] = passed
    payload["tolerance_scale"] = config.tolerance_scale
    out.write_json(f"fluct-dynamic-{config.stat}.report.json", payload)
    return passed, {"max_z_score": report.max_z_score, "total_jumps": report.extra.get("total_jumps")}


def _cmd_verify_green(config: RunConfig, out: _Out):
    kinds = [config.kind] if config.stat else [Stat.RU, Stat.U]
    thresholds = {Stat.RU: 0.02, Stat.U: 0.03}
    entries = []
    for kind in kinds:
        rep = green_kernel_solve(kind, du=config.du or 0.01)
        entries.append(
            {
                "label": f"green-{kind.value}",
                "claim": "discrete Green kernel vs rho(u v v)/rate, max relative error",
                "empirical": rep.max_rel_error,
                "target": 0.0,
                "tolerance": thresholds[kind],
                "passed": rep.max_rel_error < thresholds[kind],
            }
        )
    passed = all(e["passed"] for e in entries)
    out.write_json("verify-green.report.json", {"passed": passed, "reports": entries})
    return passed, {"max_rel_errors": {e["label"]: e["empirical"] for e in entries}}


def _cmd_verify_poincare(config: RunConfig, out: _Out):
    du = config.du or 0.01
    entries = []
    for kind in (Stat.RU, Stat.U):
        c = poincare_constant(kind, du=du)
        c_half = poincare_constant(kind, du=du / 2)
        c_doubled_g = poincare_constant(kind, du=du, g_scale=2.0)
        ok = c > 0 and abs(c_half - c) <= 0.1 * c and abs(c_doubled_g - 0.5 * c) <= 1e-9 * c
        entries.append(
            {
                "label": f"poincare-{kind.value}",
                "claim": "smallest eigenvalue of Q positive, grid-stable, linear in 1/g",
                "empirical": c,
                "refined": c_half,
                "half_g_scaling": c_doubled_g,
                "tolerance": 0.1,
                "passed": bool(ok),
            }
        )
    passed = all(e["passed"] for e in entries)
    out.write_json("verify-poincare.report.json", {"passed": passed, "reports": entries})
    return passed, {"constants": {e["label"]: e["empirical"] for e in entries}}


def _cmd_verify_rotation(config: RunConfig, out: _Out):
    n_scale = config.n or 30
    m = config.m or 1000
    params = GrandcanonicalParams.for_scale(Stat.U, n_scale)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    worst_site = 0.0
    worst_gap = 0.0
    for _ in range(m):
        d = diagram_from_differences(sample_height_differences(params, Stat.U, rng)[0])
        cols = d.columns
        if cols.size:
            qbar = cols - np.arange(1, cols.size + 1)
            vals = rotated_height(d, qbar / math.sqrt(2.0))
            target = (cols + np.arange(1, cols.size + 1)) / math.sqrt(2.0)
            worst_site = max(worst_site, float(np.max(np.abs(vals - target))))
        top = int(cols[0]) if cols.size else 0
        lo, hi = -(cols.size + 2), top + 2
        v = np.linspace(lo / math.sqrt(2.0), hi / math.sqrt(2.0), 257)
        gap = np.max(np.abs(rotated_height(d, v) - rotated_height_counting(d, v)))
        worst_gap = max(worst_gap, float(gap))
    passed = worst_site <= 1e-9 and worst_gap <= math.sqrt(2.0) + 1e-9
    out.write_json(
        "verify-rotation.report.json",
        {
            "passed": passed,
            "reports": [
                {
                    "label": "rotation-site-identity",
                    "claim": "rotated curve equals (p_i + i)/sqrt(2) at every site q_i - i",
                    "empirical": worst_site,
                    "target": 0.0,
                    "tolerance": 1e-9,
                    "passed": worst_site <= 1e-9,
                },
                {
                    "label": "rotation-global-gap",
                    "claim": "rotated curve vs counting formula, sup gap",
                    "empirical": worst_gap,
                    "target": 0.0,
                    "tolerance": math.sqrt(2.0),
                    "passed": worst_gap <= math.sqrt(2.0) + 1e-9,
                },
            ],
        },
    )
    return passed, {"diagrams": m, "worst_site_error": worst_site, "worst_gap": worst_gap}


_STATIONARY_CASES = ("rho_line", "omega", "psi_u", "psi_ru", "rho_u")
_STATIONARY_DU = {"rho_line": 0.02, "omega": 0.02, "psi_u": 0.01, "psi_ru": 0.01, "rho_u": 0.01}


def _cmd_verify_stationary(config: RunConfig, out: _Out):
    entries = []
    for name in _STATIONARY_CASES:
        du = config.du or _STATIONARY_DU[name]
        coarse = stationarity_drift(name, 2 * du, t_end=config.t_end or 1.0)
        fine = stationarity_drift(name, du, t_end=config.t_end or 1.0)
        ok = fine < 1e-4 and fine <= coarse / 2.0
        entries.append(
            {
                "label": f"stationary-{name}",
                "claim": "closed-form stationary profile drift under its PDE",
                "empirical": fine,
                "coarse": coarse,
                "target": 0.0,
                "tolerance": 1e-4,
                "passed": bool(ok),
            }
        )
    passed = all(e["passed"] for e in entries)
    out.write_json("verify-stationary.report.json", {"passed": passed, "reports": entries})
    return passed, {"drifts": {e["label"]: e["empirical"] for e in entries}}


def _collect_reports(directory: str) -> list[dict]:
    found = []
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise ConfigError(f"cannot read report directory {directory}: {exc}") from exc
    for name in names:
        if not name.endswith(".report.json"):
            continue
        with open(os.path.join(directory, name), "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if "reports" in payload:
            found.extend(payload["reports"])
        else:
            found.append(payload)
    return found


def emit_report(reports: list[dict]) -> tuple[str, bool]:
    """Human-readable verdict table; raises on empty input."""
    if not reports:
        raise ConfigError("no reports to summarize")
    lines = []
    n_pass = 0
    for rep in reports:
        ok = bool(rep.get("passed"))
        n_pass += ok
        label = rep.get("label", "unnamed")
        detail = ""
        if "empirical" in rep and np.isscalar(rep.get("empirical")):
            detail = f"  value={rep['empirical']:.6g}"
            if np.isscalar(rep.get("tolerance")):
                detail += f" tol={rep['tolerance']:.6g}"
        elif "max_z_score" in rep:
            detail = f"  max_z={rep['max_z_score']:.3f}"
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}{detail}")
    lines.append(f"PASS {n_pass}/{len(reports)}")
    return "\n".join(lines), n_pass == len(reports)


def _cmd_report(config: RunConfig, out: _Out):
    reports = _collect_reports(out.directory)
    text, all_pass = emit_report(reports)
    print(text)
    return all_pass, {"reports": len(reports)}


_HANDLERS = {
    "sample-static": _cmd_sample_static,
    "simulate": _cmd_simulate,
    "solve-pde": _cmd_solve_pde,
    "solve-spde": _cmd_solve_spde,
    "fluct-static": _cmd_fluct_static,
    "fluct-dynamic": _cmd_fluct_dynamic,
    "verify-green": _cmd_verify_green,
    "verify-poincare": _cmd_verify_poincare,
    "verify-rotation": _cmd_verify_rotation,
    "verify-stationary": _cmd_verify_stationary,
    "report": _cmd_report,
}


def execute(config: RunConfig) -> int:
    """Run one configured command; returns the process exit code."""
    directory = config.output_dir or os.environ.get("YOUNGLAB_OUTPUT_DIR", "runs")
    out = _Out(directory)
    t0 = time.perf_counter()
    passed, metrics = _HANDLERS[config.command](config, out)
    elapsed = time.perf_counter() - t0
    manifest = {
        "version": __version__,
        "command": config.command,
        "config": asdict(config),
        "seed_derivation": SEED_RULE,
        "workers": config.workers or int(os.environ.get("YOUNGLAB_WORKERS", "1")),
        "elapsed_seconds": elapsed,
        "metrics": metrics,
        "files": {os.path.basename(p): _sha256(p) for p in out.files},
    }
    if config.command != "report":
        path = os.path.join(directory, "manifest.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if passed is None:
        return 0
    return 0 if passed else 1


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
        return execute(config)
    except (ConfigError, EnsembleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
