"""Command-line front end: ``vortexlab <subcommand> --config FILE``.

Subcommands write into ``<out>/<subcommand>/`` with one directory per
viscosity (``nu_0``, ``nu_1``, ...) and the resolved configuration in
``config.json``.  ``report`` consolidates whatever runs it finds below
``<out>`` into ``report.json`` plus two-column ``.dat`` files.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import tomli

from .asymptotic import (
    PIECES, VortexScenario, build_correction_profiles, burgers_first_order, integrate_center,
    l1_norm, quadrupole_profile, residual_norm, solve_burgers,
)
from .config import ScenarioConfig, load_config, parse_config
from .diagnostics import read_report, relaxation_fit, write_report
from .errors import ConfigError, MissingArtifacts, RunError, VortexLabError
from .experiments import box_side, initial_gap, relaxation_run, tracking_run
from .flows import strain_rates
from .linear_dynamics import assemble_operators, decay_rate, evolve_linear, spectrum
from .spectral_solver import SolverConfig, write_snapshot

SUBCOMMANDS = ("simulate", "approx", "relax", "spectrum", "burgers", "report")
ENV_OUT = "VORTEXLAB_OUT"


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([repr(float(v)) if not isinstance(v, str) else v for v in row])


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def _scenario(cfg: ScenarioConfig, nu: float) -> VortexScenario:
    return VortexScenario(cfg.Gamma, nu, cfg.z0, cfg.t0, cfg.T, cfg.flow(), cfg.t_anchor)


def _solver(cfg: ScenarioConfig) -> SolverConfig:
    return SolverConfig(cfl=cfg.cfl, dealias=cfg.dealias, window_fraction=cfg.window_fraction)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------------------------------
# per-viscosity jobs (top level so they can run in worker processes)
# ---------------------------------------------------------------------------

def _simulate_one(raw: dict, index: int, run_dir: str, fmt: str) -> str:
    cfg = parse_config(raw)
    nu = cfg.nu[index]
    scenario = _scenario(cfg, nu)
    out = Path(run_dir) / f"nu_{index}"
    out.mkdir(parents=True, exist_ok=True)
    result = tracking_run(scenario, cfg.N, cfg.t0, cfg.times(), cfg.L, _solver(cfg),
                          keep_snapshots=cfg.snapshots, init=cfg.init)
    for k, snap in enumerate(result.snapshots):
        write_snapshot(out / f"snap_{k:03d}", snap, cfg.Gamma, nu, fmt)
    write_report(out / "tracking.csv", result.records)
    _write_json(out / "run.json", {"nu": nu, "delta": scenario.delta, "T0": scenario.T0,
                                   "L": result.grid.L, "N": result.grid.N, "steps": result.steps})
    return str(out)


def _approx_one(raw: dict, index: int, run_dir: str, fmt: str) -> str:
    cfg = parse_config(raw)
    scenario = _scenario(cfg, cfg.nu[index])
    out = Path(run_dir) / f"nu_{index}"
    out.mkdir(parents=True, exist_ok=True)
    times = cfg.times()
    traj = integrate_center(scenario, "modified", t_end=max(times), t_start=min(times),
                            output_times=times)
    rows = []
    for k, t in enumerate(times):
        approx = build_correction_profiles(scenario, t, traj)
        header, cols = ["r"], [approx.grid.r]
        for name in PIECES:
            for n, mode in sorted(approx.pieces[name].modes.items()):
                header += [f"{name}_n{n}_cos", f"{name}_n{n}_sin"]
                cols += [mode.c, mode.s]
        np.savetxt(out / f"profiles_{k:03d}.csv", np.column_stack(cols), delimiter=",",
                   header=",".join(header), comments="", fmt="%.17g")
        if np.isfinite(scenario.T0):
            res = residual_norm(scenario, t, traj, n_theta=cfg.sections["approx"]["n_theta"])
            rows.append((t, approx.eps, res.sup_weighted, res.l2_weighted, res.l2))
        else:
            rows.append((t, 0.0, 0.0, 0.0, 0.0))
    _write_csv(out / "residual.csv", ("t", "eps", "sup_weighted", "l2_weighted", "l2"), rows)
    return str(out)


def _relax_one(raw: dict, index: int, run_dir: str, fmt: str) -> dict:
    cfg = parse_config(raw)
    rl = cfg.sections["relax"]
    nu = cfg.nu[index]
    delta = nu / cfg.Gamma
    out = Path(run_dir) / f"nu_{index}"
    out.mkdir(parents=True, exist_ok=True)
    if rl["mode"] == "linear":
        op = assemble_operators(2)
        phi = op.from_profiles(quadrupole_profile()(op.grid.r))
        hist = evolve_linear(op, phi, delta, rl["tau_max"], rl["dtau"], stop_ratio=5e-3)
        _write_csv(out / "history.csv", ("tau", "norm"), zip(hist.tau, hist.norm))
        return {"delta": delta, "beta": decay_rate(hist)}
    scenario = _scenario(cfg, nu)
    t_end = rl["t_end"] if rl["t_end"] is not None else cfg.T
    times = np.geomspace(cfg.t0, t_end, rl["samples"])
    L = cfg.L if cfg.L is not None else box_side(scenario, cfg.N, cfg.t0, t_end)
    samples = relaxation_run(scenario, cfg.N, L, times, _solver(cfg))
    eps2 = np.array([float(scenario.eps(s.t)) ** 2 for s in samples])
    err = np.array([s.l1_vs_omega_app for s in samples])
    a = np.array([strain_rates(scenario.flow, scenario.z0, s.t).a for s in samples])
    ratio = np.array([s.a_hat for s in samples]) / a
    _write_csv(out / "relaxation.csv", ("t", "eps2", "l1_vs_omega_app", "l1_vs_lambOseen",
                                        "a_hat", "b_hat", "a_ratio"),
               [(s.t, e, s.l1_vs_omega_app, s.l1_vs_lambOseen, s.a_hat, s.b_hat, q)
                for s, e, q in zip(samples, eps2, ratio)])
    doubled = VortexScenario(cfg.Gamma, nu, cfg.z0, 2 * cfg.t0, 2 * cfg.T, cfg.flow(), cfg.t_anchor)
    return {"delta": delta, "beta": relaxation_fit(times, err / eps2),
            "a_ratio_final": float(ratio[-1]),
            "gap_t0": initial_gap(scenario, cfg.N, L), "gap_2t0": initial_gap(doubled, cfg.N, L)}


def _map(job, cfg: ScenarioConfig, raw: dict, run_dir: Path, fmt: str, workers: int) -> list:
    args = [(raw, k, str(run_dir), fmt) for k in range(len(cfg.nu))]
    if workers <= 1 or len(args) == 1:
        return [job(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, *zip(*args)))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _spectrum(cfg: ScenarioConfig, run_dir: Path) -> None:
    sp = cfg.sections["spectrum"]
    rows = []
    for n in sp["modes"]:
        vals = spectrum(assemble_operators(n), sp["count"])
        rows += [(n, k, v, -n / 2 - k) for k, v in enumerate(vals)]
    _write_csv(run_dir / "spectrum.csv", ("n", "index", "eigenvalue", "expected"), rows)


def _burgers(cfg: ScenarioConfig, run_dir: Path) -> None:
    bu = cfg.sections["burgers"]
    lam = float(bu["lam"])
    deltas = bu["delta"] if isinstance(bu["delta"], list) else [bu["delta"]]
    rows = []
    for k, d in enumerate(deltas):
        sol = solve_burgers(float(d), lam)
        first = burgers_first_order(float(d), lam, sol.field.grid)
        rows.append((d, l1_norm(sol.field - first), sol.iterations))
        g = sol.field.grid
        cols, header = [g.r], ["r"]
        for n, mode in sorted(sol.field.modes.items()):
            cols += [mode.c, mode.s]
            header += [f"n{n}_cos", f"n{n}_sin"]
        np.savetxt(run_dir / f"profiles_{k:03d}.csv", np.column_stack(cols), delimiter=",",
                   header=",".join(header), comments="", fmt="%.17g")
    _write_csv(run_dir / "convergence.csv", ("delta", "l1_gap", "iterations"), rows)


def run_scenario(config_path, subcommand: str, out=None, fmt: str | None = None,
                 workers: int = 1, seed: int = 0) -> Path:
    """Run one subcommand and return its output directory."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out = Path(os.environ.get(ENV_OUT) or out or "runs")
    if subcommand == "report":
        export_report(out)
        return out
    cfg = load_config(config_path)
    raw = _raw_from(config_path)
    fmt = fmt or cfg.format
    run_dir = out / subcommand
    run_dir.mkdir(parents=True, exist_ok=True)
    _write_json(run_dir / "config.json", {"subcommand": subcommand, "seed": seed, "format": fmt,
                                         "input": raw, "resolved": cfg.resolved()})
    try:
        if subcommand == "simulate":
            _map(_simulate_one, cfg, raw, run_dir, fmt, workers)
        elif subcommand == "approx":
            _map(_approx_one, cfg, raw, run_dir, fmt, workers)
        elif subcommand == "relax":
            results = _map(_relax_one, cfg, raw, run_dir, fmt, workers)
            summary = {"mode": cfg.sections["relax"]["mode"], "runs": results}
            if len(results) >= 2:
                summary["beta_slope"] = loglog_slope([1 / r["delta"] for r in results],
                                                     [r["beta"] for r in results])
            _write_json(run_dir / "relax.json", summary)
        elif subcommand == "spectrum":
            _spectrum(cfg, run_dir)
        elif subcommand == "burgers":
            _burgers(cfg, run_dir)
    except ConfigError:
        raise
    except VortexLabError as exc:
        raise RunError(f"{subcommand}: {type(exc).__name__}: {exc}") from exc
    return run_dir


def _raw_from(config_path) -> dict:
    path = Path(config_path)
    if path.suffix == ".json":
        return json.loads(path.read_text())
    return tomli.loads(path.read_text())


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _tracking_summary(sim_dir: Path) -> dict:
    meta = json.loads((sim_dir / "config.json").read_text())
    cfg = parse_config(meta["input"])
    flow = cfg.flow()
    runs = sorted(p for p in sim_dir.glob("nu_*") if (p / "tracking.csv").exists())
    if not runs:
        return {}
    eps_half, err_half, ratios, gaps, ordering = [], [], [], [], []
    for run in runs:
        info = json.loads((run / "run.json").read_text())
        T0 = info["T0"]
        recs = read_report(run / "tracking.csv")
        t = np.array([r.t for r in recs])
        if np.isfinite(T0):
            k = int(np.argmin(np.abs(t / T0 - 0.5)))
            eps_half.append(recs[k].eps)
            err_half.append(recs[k].l1_vs_omega_app)
        last = recs[-1]
        a = strain_rates(flow, (last.z_x, last.z_y), last.t).a
        ratios.append(last.a_hat / a if a != 0 else float("nan"))
        window = [r for r in recs if np.isfinite(T0) and 0.3 - 1e-9 <= r.t / T0 <= 1 + 1e-9]
        gaps.append(max((np.hypot(r.zbar_x - r.z_x, r.zbar_y - r.z_y)
                         / np.hypot(r.zbar_x - r.zhat_x, r.zbar_y - r.zhat_y) for r in window),
                        default=float("nan")))
        ordering.append(all(r.l1_vs_omega_app < r.l1_vs_lambOseen_z < r.l1_vs_lambOseen_zhat
                            for r in recs))
        np.savetxt(run / "error_vs_t.dat", np.column_stack([t, [r.l1_vs_omega_app for r in recs]]),
                   fmt="%.17g")
    out = {"quadrupole_ratio": ratios, "center_gap_ratio": gaps, "ordering_holds": ordering}
    if len(eps_half) >= 2:
        out["theorem1_slope"] = loglog_slope(eps_half, err_half)
        np.savetxt(sim_dir / "error_vs_eps.dat", np.column_stack([eps_half, err_half]), fmt="%.17g")
    return out


def export_report(run_dir) -> dict:
    """Collect acceptance metrics from the runs below ``run_dir`` into ``report.json``."""
    run_dir = Path(run_dir)
    report = {}
    sim = run_dir / "simulate"
    if (sim / "config.json").exists():
        report.update(_tracking_summary(sim))
    relax = run_dir / "relax" / "relax.json"
    if relax.exists():
        data = json.loads(relax.read_text())
        report["relax"] = data
        runs = data["runs"]
        np.savetxt(run_dir / "relax" / "beta.dat",
                   np.column_stack([[1 / r["delta"] for r in runs], [r["beta"] for r in runs]]),
                   fmt="%.17g")
    spec = run_dir / "spectrum" / "spectrum.csv"
    if spec.exists():
        with spec.open() as fh:
            rows = list(csv.DictReader(fh))
        report["spectrum_max_error"] = max(abs(float(r["eigenvalue"]) - float(r["expected"]))
                                           for r in rows)
    burg = run_dir / "burgers" / "convergence.csv"
    if burg.exists():
        with burg.open() as fh:
            rows = list(csv.DictReader(fh))
        d = [float(r["delta"]) for r in rows]
        g = [float(r["l1_gap"]) for r in rows]
        if len(rows) >= 2:
            report["burgers_slope"] = loglog_slope(d, g)
        np.savetxt(run_dir / "burgers" / "gap.dat", np.column_stack([d, g]), fmt="%.17g")
    if not report:
        raise MissingArtifacts(f"no run outputs found under {run_dir}")
    _write_json(run_dir / "report.json", _jsonable(report))
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file (.toml or .json)")
    common.add_argument("--out", default="runs", help="output root (VORTEXLAB_OUT overrides)")
    common.add_argument("--format", choices=("csv", "binary"), default=None,
                        help="snapshot file format (default from the config)")
    common.add_argument("--workers", type=int, default=1, help="concurrent runs over the nu list")
    common.add_argument("--seed", type=int, default=0, help="recorded in the run configuration")
    parser = argparse.ArgumentParser(prog="vortexlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "report" and not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        path = run_scenario(args.config, args.command, args.out, args.format, args.workers, args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (RunError, MissingArtifacts) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
