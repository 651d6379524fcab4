"""Batch front end: cplab <subcommand> --config <path> [--out <dir>] [--seed <u64>].

Configs are JSON, schema-validated with unknown keys rejected; reports are
JSON with complex numbers as [re, im] pairs, trajectories CSV.  Identical
config + seed produce byte-identical reports apart from the "meta" block
(timestamp/runtime), which determinism comparisons must drop.

Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import importlib.resources
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema
import numpy as np

from . import confluence as cf
from . import mmkdv
from .dynamics import integrate, monitor_invariants
from .errors import (CplabError, ConfigError, NonConvergedEigensolve, Overflow,
                     ParticleCollision, PoleAtLambda)
from .lax import default_lambda_grid, spectral_match, spectral_table
from .phase import MatrixPhasePoint, SystemKind, SystemSpec
from .reduction import ReducedPoint, Slice, reduce
from .sampling import random_level_set_point, random_reduced
from .selfcheck import run_selfcheck
from .traces import CalogeroMatrixSpec, evenness_check, tr_q3_closed, \
    tr_q4_closed, trace_power_oracle

NUMERICAL_ERRORS = (ParticleCollision, Overflow, NonConvergedEigensolve,
                    PoleAtLambda)


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _schema() -> dict:
    text = importlib.resources.files("cplab").joinpath("config_schema.json") \
        .read_text()
    return json.loads(text)


def load_config(path: str, command: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected: {exc.message}") from exc
    if cfg["command"] != command:
        raise ConfigError(
            f"config command {cfg['command']!r} does not match subcommand "
            f"{command!r}")
    return cfg


def as_complex(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    return complex(value[0], value[1])


def cvector(values) -> np.ndarray:
    return np.array([as_complex(v) for v in values])


def cmatrix(rows) -> np.ndarray:
    return np.array([[as_complex(v) for v in row] for row in rows])


def system_spec(cfg: dict) -> SystemSpec:
    sy = cfg.get("system")
    if sy is None:
        raise ConfigError("this command needs a 'system' block")
    kw = {}
    for name in ("theta", "theta0", "theta1", "alpha"):
        if name in sy:
            kw[name] = as_complex(sy[name])
    if "tau" in sy:
        kw["tau"] = sy["tau"]
    if "omega" in sy:
        kw["omega"] = sy["omega"]
    try:
        return SystemSpec(SystemKind(sy["kind"]),
                          autonomous=sy.get("autonomous", False), **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def lambda_grid(cfg: dict) -> list[complex]:
    lg = cfg.get("lambda_grid")
    if lg is None:
        return default_lambda_grid()
    if "values" in lg:
        return [as_complex(v) for v in lg["values"]]
    return default_lambda_grid(lg.get("points_per_circle", 10),
                               tuple(lg.get("radii", (0.5, 2.0))))


def initial_state(cfg: dict, rng: np.random.Generator):
    init = cfg.get("initial", {"random": True})
    g = cfg.get("g", 1.0)
    t = cfg.get("t", 0.0)
    sl = Slice(cfg.get("slice", "Q_DIAG"))
    if "reduced" in init:
        red = init["reduced"]
        return ReducedPoint(cvector(red["positions"]), cvector(red["momenta"]),
                            g, t, sl)
    if "matrix" in init:
        return MatrixPhasePoint(cmatrix(init["matrix"]["q"]),
                                cmatrix(init["matrix"]["p"]), t)
    n = cfg.get("n")
    if n is None:
        raise ConfigError("random initial data needs 'n'")
    return random_reduced(rng, n, g, sl, t)


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (Slice, SystemKind)):
        return obj.value
    return obj


def write_report(report: dict, out_dir: Path, name: str, runtime: float) -> Path:
    payload = {
        "meta": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "runtime_seconds": round(runtime, 3),
        },
        "report": _jsonable(report),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_trajectory_csv(traj, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        first = traj.states[0]
        if isinstance(first, ReducedPoint):
            def flatten(s):
                return np.concatenate([s.positions, s.momenta])
        else:
            def flatten(s):
                return np.concatenate([s.q.ravel(), s.p.ravel()])
        k = flatten(first).size
        header = ["t"]
        for i in range(1, k + 1):
            header += [f"re(x_{i})", f"im(x_{i})"]
        writer.writerow(header)
        for t, s in zip(traj.times, traj.states):
            row = [repr(float(t))]
            for z in flatten(s):
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg, rng, out):
    spec = system_spec(cfg)
    tm = cfg.get("time")
    if tm is None:
        raise ConfigError("simulate needs a 'time' block")
    start = initial_state(cfg, rng)
    traj = integrate(spec, start, tm["t0"], tm["t1"], tm["h"],
                     g=cfg.get("g"))
    monitors = [as_complex(v) for v in cfg.get("monitor_lambdas", [])]
    report = {
        "operation": "integrate (RK4, fixed step)",
        "steps": len(traj.times) - 1,
        "final_time": traj.times[-1],
        "energy_initial": traj.diagnostics["energy"][0],
        "energy_final": traj.diagnostics["energy"][-1],
    }
    if monitors and spec.kind is not SystemKind.P_II_POLY:
        report["invariants"] = monitor_invariants(spec, traj, monitors,
                                                  g=cfg.get("g"))
    csv_name = cfg.get("output", {}).get("trajectory_csv", "trajectory.csv")
    write_trajectory_csv(traj, out, csv_name)
    report["trajectory_csv"] = csv_name
    return report, True


def cmd_verify_duality(cfg, rng, out):
    spec = system_spec(cfg)
    n = cfg.get("n", 3)
    g = cfg.get("g", 1.0)
    tol = cfg.get("tolerances", {}).get("duality", 1e-8)
    grid = lambda_grid(cfg)
    pt = random_level_set_point(rng, n, g, t=cfg.get("t", 0.0))
    xq = reduce(pt, Slice.Q_DIAG, g, tol=1e-5)
    xp = reduce(pt, Slice.P_DIAG, g, tol=1e-5)
    devs = {}
    for name, a, b in (("unreduced_vs_reduced", pt, xq),
                       ("unreduced_vs_dual", pt, xp),
                       ("reduced_vs_dual", xq, xp)):
        _, devs[name] = spectral_match(spec, a, b, grid, tol)
    worst = max(devs.values())
    report = {
        "operation": "spectral_match on char-poly coefficients",
        "tolerance": tol,
        "lambda_grid_size": len(grid),
        "max_coeff_deviation": worst,
        "deviations": devs,
        "pass": worst < tol,
    }
    return report, report["pass"]


def cmd_spectral(cfg, rng, out):
    spec = system_spec(cfg)
    obj = initial_state(cfg, rng)
    grid = lambda_grid(cfg)
    table = spectral_table(spec, obj, grid)
    return {
        "operation": "char_poly over lambda grid",
        "samples": [{"lambda": s.lam, "coeffs": list(s.coeffs)} for s in table],
    }, True


def cmd_confluence(cfg, rng, out):
    eps = cfg.get("eps_sweep", [0.1, 0.05, 0.025])
    theta = as_complex(cfg.get("conf_theta", 0.7))
    n = cfg.get("n", 2)
    g = cfg.get("g", 1.0)
    from .selfcheck import _conf_remainders, _generic_conf_point
    pt = _generic_conf_point(rng, n)
    from .reduction import embed
    while True:
        xq = random_reduced(rng, n, g, t=0.1)
        if _conf_remainders(embed(xq)) > 1.0:
            break
    xd = random_reduced(rng, n, g, Slice.P_DIAG, t=0.1)
    report = {"operation": "confluence_residual sweep + dual breakdown",
              "eps_sweep": eps, "theta": theta, "sweeps": {}, "breakdown": {}}
    ok = True
    for kind in ("conf", "conf1"):
        for label, point, reduced in (("matrix", pt, False), ("reduced", xq, True)):
            sweep = cf.residual_ratio_sweep(point, theta, eps, kind, reduced)
            good = all(3.5 <= r <= 4.5 for r in sweep["ratios"])
            report["sweeps"][f"{kind}_{label}"] = {**sweep, "pass": good}
            ok = ok and good
    cp = cf.ConfluenceParams(eps[0], theta)
    b_full = cf.dual_confluence_breakdown(xd, cp)
    b_lin = cf.dual_confluence_breakdown(xd, cp, use_linear=True)
    report["breakdown"]["conf"] = {**b_full, "pass": b_full["deviation"] > 1e-3}
    report["breakdown"]["conf1"] = {**b_lin, "pass": b_lin["deviation"] < 1e-8}
    ok = ok and report["breakdown"]["conf"]["pass"] \
        and report["breakdown"]["conf1"]["pass"]
    report["pass"] = ok
    return report, ok


def cmd_traces(cfg, rng, out):
    tr = cfg.get("trace", {})
    n_max = tr.get("n_max", 8)
    trials = tr.get("trials", 50)
    max_l = tr.get("max_even_l", 12)
    worst = 0.0
    for n in range(1, n_max + 1):
        for _ in range(trials):
            spec = CalogeroMatrixSpec(
                rng.normal(size=n) + 1j * rng.normal(size=n),
                np.arange(n) * 1.4 + rng.uniform(-0.3, 0.3, n),
                float(rng.uniform(0.5, 2.0)))
            for l, closed in ((3, tr_q3_closed), (4, tr_q4_closed)):
                oracle = trace_power_oracle(spec, l)
                worst = max(worst,
                            abs(closed(spec) - oracle) / max(1.0, abs(oracle)))
    worked = CalogeroMatrixSpec([1.0, 2.0], [1.0, 0.0], 1.0)
    evenness = {}
    even_ok = True
    spec3 = CalogeroMatrixSpec(rng.normal(size=3), [0.0, 1.3, 2.9], 1.0)
    for l in range(1, max_l + 1):
        rep = evenness_check(spec3, l, [0.5, 1.0, 2.0])
        evenness[l] = rep
        even_ok = even_ok and rep["symmetry_deviation"] < 1e-11 \
            and rep["odd_over_even"] < 1e-9
    w3, w4 = tr_q3_closed(worked), tr_q4_closed(worked)
    ok = worst < 1e-10 and even_ok and abs(w3 - 18) < 1e-12 and abs(w4 - 47) < 1e-12
    report = {
        "operation": "tr_q3/tr_q4 closed forms vs trace_power_oracle",
        "tolerance": 1e-10,
        "worst_relative_deviation": worst,
        "worked_values": {"l3": w3, "l4": w4},
        "evenness": evenness,
        "pass": ok,
    }
    return report, ok


def cmd_mmkdv(cfg, rng, out):
    sw, calib = mmkdv.calibrate(seed=int(rng.integers(0, 2 ** 31)))
    worst_tw = worst_ss = 0.0
    for _ in range(100):
        v, p = rng.normal(size=2) + 1j * rng.normal(size=2)
        z = float(rng.normal())
        th = complex(rng.normal())
        worst_tw = max(worst_tw, mmkdv.tw_residual(v, p, z, th, sw))
        worst_ss = max(worst_ss, mmkdv.ss_residual(v, p, z, th, sw))
    samples = [(rng.normal(), rng.normal(), float(rng.normal()), rng.normal())
               for _ in range(100)]
    deform = mmkdv.deformation_check(sw, samples)
    d = np.diag(rng.normal(size=2)).astype(complex)
    e = np.diag(rng.normal(size=2)).astype(complex)
    commuting = mmkdv.tw_residual(d, e, 0.7, 0.2, sw)
    sens = mmkdv.switch_sensitivity(sw)
    ok = (worst_tw < 1e-12 and worst_ss < 1e-12
          and deform["max_deviation"] < 1e-10 and commuting < 1e-10)
    report = {
        "operation": "mmkdv calibration + residuals",
        "calibration": calib,
        "scalar_tw_residual_max": worst_tw,
        "scalar_ss_residual_max": worst_ss,
        "deformation_check": deform,
        "commuting_matrix_tw_residual": commuting,
        "switch_sensitivity": sens,
        "pass": ok,
    }
    return report, ok


def cmd_selfcheck(cfg, rng, out):
    seed = cfg.get("seed", 0)
    report = run_selfcheck(seed)
    return report, report["summary"]["failed"] == 0


COMMANDS = {
    "simulate": cmd_simulate,
    "verify-duality": cmd_verify_duality,
    "spectral": cmd_spectral,
    "confluence": cmd_confluence,
    "traces": cmd_traces,
    "mmkdv": cmd_mmkdv,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cplab",
        description="matrix Painlevé / Calogero reduction laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config, args.command)
        if args.seed is not None:
            cfg["seed"] = args.seed
        rng = np.random.default_rng(cfg.get("seed", 0))
        report, ok = COMMANDS[args.command](cfg, rng, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical error in {args.command}: "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except CplabError as exc:
        print(f"error in {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3

    report.setdefault("seed", cfg.get("seed", 0))
    name = cfg.get("output", {}).get("report_json", f"{args.command}.json")
    path = write_report(report, Path(args.out), name, time.perf_counter() - t0)
    print(f"{'PASS' if ok else 'FAIL'} {args.command} -> {path}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
