"""Command line interface.

Exit codes: 0 success, 1 runtime failure, 2 invalid input or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_GRID,
    afe_aggregate,
    afe_sectoral,
    monthly_panel_from_trajectory,
    sensitivity_sweep,
    shock_regressions,
    single_shock_sweep,
)
from .config import DEFAULT_METRIC_MONTHS, RunConfig, file_digest
from .economy import output_multipliers, propensity_to_consume, technical_coefficients, upstreamness
from .errors import ModelError, ProdNetError, ValidationError
from .pipeline import build_attributes, build_economy, build_schedule, load_inputs, run_config
from .production import ProductionFunction
from .tables import read_panel, write_aggregates, write_panel, write_rows, write_trajectory
from .toy import config_path as toy_config_path

logger = logging.getLogger("prodnet")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


def _load(args) -> RunConfig:
    path = args.config if args.config is not None else toy_config_path()
    cfg = RunConfig.load(path)
    return cfg.with_overrides(kind=args.kind, scenario=args.scenario, out=args.out)


def _write_manifest(out: Path, cfg: RunConfig, files: list[str], extra: dict | None = None) -> None:
    manifest = {
        "version": __version__,
        "scenario": cfg.scenario_name(),
        "supply": cfg.scenario_spec().supply,
        "kind": cfg.production_function().value,
        "config_hash": cfg.config_hash(),
        "settings": cfg.resolved(),
        "outputs": {name: file_digest(out / name) for name in sorted(files)},
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    problems: list[str] = []
    try:
        cfg = _load(args)
    except ValidationError as exc:
        print(f"FAIL config: {exc}")
        return EXIT_INVALID
    for missing in cfg.missing_paths():
        problems.append(f"missing file {missing}")
    econ = attrs = None
    if not problems:
        try:
            econ = build_economy(cfg)
        except ValidationError as exc:
            problems.append(f"economy: {exc}")
    if econ is not None:
        try:
            attrs = build_attributes(cfg, econ)
            build_schedule(cfg, econ, attrs)
        except ValidationError as exc:
            problems.append(f"scenario: {exc}")
    if problems:
        for p in problems:
            print(f"FAIL {p}")
        return EXIT_INVALID
    print(f"OK {econ.n_industries} industries, scenario {cfg.scenario_name()}, kind {cfg.production_function().value}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    econ = build_economy(cfg)
    tc = technical_coefficients(econ)
    u = upstreamness(tc)
    mult = output_multipliers(tc)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    theta0 = econ.c0 / econ.c0.sum()
    write_rows(
        out / "calibration.csv",
        ["industry_code", "x0", "l0", "c0", "f0", "n", "theta0", "upstreamness", "multiplier"],
        zip(econ.industry_codes, econ.x0, econ.l0, econ.c0, econ.f0.sum(axis=1),
            econ.inventory_targets, theta0, u, mult),
    )
    write_rows(
        out / "criticality.csv",
        ["input_code", *econ.industry_codes],
        ([code, *row] for code, row in zip(econ.industry_codes, econ.criticality.ratings)),
    )
    _write_manifest(out, cfg, ["calibration.csv", "criticality.csv"],
                    {"m": propensity_to_consume(econ), "n_industries": econ.n_industries})
    print(f"wrote calibration for {econ.n_industries} industries to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    inputs, traj = run_config(cfg)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    files = ["trajectory.csv", "aggregate.csv"]
    write_trajectory(out / "trajectory.csv", traj)
    write_aggregates(out / "aggregate.csv", traj)
    econ = inputs.economy
    extra = {"m": traj.m, "xi_lockdown": traj.xi_lockdown, "horizon": len(traj)}
    months = {d.month for d in traj.dates}
    if 2 in months:
        panel = monthly_panel_from_trajectory(traj, weights=econ.x0 / econ.x0.sum())
        write_panel(out / "monthly_panel.csv", panel)
        files.append("monthly_panel.csv")
        if cfg.empirical_panel is not None:
            data = read_panel(cfg.path(cfg.empirical_panel))
            _write_metrics(out / "metrics.csv", panel, data, cfg.metrics.get("months", DEFAULT_METRIC_MONTHS))
            files.append("metrics.csv")
    _write_manifest(out, cfg, files, extra)
    agg = traj.aggregate_output / econ.x0.sum()
    print(f"ran {len(traj)} days, scenario {cfg.scenario_name()}, kind {traj.kind.value}; "
          f"aggregate output min {agg.min():.4f}, final {agg[-1]:.4f}; wrote {out}")
    return EXIT_OK


def _write_metrics(path: Path, model, data, months) -> tuple[float, float]:
    sec = afe_sectoral(model, data, months=months)
    agg = afe_aggregate(model, data, months=months)
    write_rows(path, ["afe_sectoral", "afe_aggregate", "n_industries", "months"],
               [[sec, agg, len(model.industry_codes), " ".join(months)]])
    return sec, agg


def cmd_metrics(args) -> int:
    model = read_panel(args.model_csv, "model")
    data = read_panel(args.data_csv, "empirical")
    months = args.months.split(",") if args.months else DEFAULT_METRIC_MONTHS
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    sec, agg = _write_metrics(out / "metrics.csv", model, data, months)
    print(f"afe_sectoral {sec:.6g}  afe_aggregate {agg:.6g}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    sw = cfg.sweep
    axes = sw.get("axes")
    if not axes:
        raise ValidationError("sweep.axes is required, e.g. {tau: [5, 10, 30]}")
    inputs = load_inputs(cfg)
    results = sensitivity_sweep(
        inputs.economy, cfg.run_params(), inputs.schedule, cfg.production_function(), axes,
        mode=sw.get("mode", "cartesian"), link_gamma=bool(sw.get("link_gamma", False)),
        jobs=args.jobs if args.jobs is not None else int(sw.get("jobs", 1)),
    )
    names = sorted({k for cell, *_ in results for k in cell})
    dates = inputs.schedule.dates()
    x0 = inputs.economy.x0.sum()
    rows = []
    for cell, agg, cd in results:
        for t, date in enumerate(dates[: len(agg)]):
            rows.append([*(cell.get(n, "") for n in names), t, date.isoformat(), agg[t], agg[t] / x0, cd[t]])
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / "sweep.csv", [*names, "day", "date", "aggregate_output", "fraction", "consumption_demand"], rows)
    _write_manifest(out, cfg, ["sweep.csv"], {"cells": len(results)})
    print(f"swept {len(results)} cells; wrote {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_single_shock(args) -> int:
    cfg = _load(args)
    ss = cfg.single_shock
    econ = build_economy(cfg)
    kinds = ss.get("kinds") or [cfg.production_function().value]
    if args.kind is not None:
        kinds = [args.kind]
    result = single_shock_sweep(
        econ, cfg.run_params(), kinds,
        mode=ss.get("mode", "supply"),
        grid=ss.get("grid", DEFAULT_GRID),
        window_days=int(ss.get("window_days", 30)),
        industries=ss.get("industries"),
        jobs=args.jobs if args.jobs is not None else int(ss.get("jobs", 1)),
    )
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    write_rows(
        out / "single_shock.csv",
        ["industry_code", "magnitude", "kind", "fraction", "aggregate_output"],
        ([r.industry, r.magnitude, r.kind, r.fraction, r.level] for r in result.records),
    )
    files = ["single_shock.csv"]
    regressors = ss.get("regressors", ["upstreamness", "multiplier", "output"])
    if len({r.industry for r in result.records}) > len(regressors) + 1:
        rows = []
        for (kind, mag), res in shock_regressions(result, econ, regressors).items():
            for name, b, se in zip(res.names, res.coefficients, res.std_errors):
                rows.append([kind, mag, name, b, se, res.adjusted_r2, res.n_obs])
        write_rows(out / "regressions.csv",
                   ["kind", "magnitude", "term", "coefficient", "std_error", "adjusted_r2", "n_obs"], rows)
        files.append("regressions.csv")
    _write_manifest(out, cfg, files, {"mode": result.mode, "window_days": result.window_days})
    print(f"ran {len(result.records)} single-shock cells; wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML run config (default: bundled toy economy)")
    common.add_argument("--kind", choices=[k.value for k in ProductionFunction], help="production function")
    common.add_argument("--scenario", help="supply scenario id (none, s1..s6, custom) or a preset name")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="prodnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check inputs and scenario").set_defaults(func=cmd_validate)
    sub.add_parser("calibrate", parents=[common], help="write derived coefficients").set_defaults(func=cmd_calibrate)
    sub.add_parser("run", parents=[common], help="simulate one scenario").set_defaults(func=cmd_run)
    sub.add_parser("sweep", parents=[common], help="parameter sensitivity grid").set_defaults(func=cmd_sweep)
    sub.add_parser("single-shock", parents=[common], help="one-industry shock sweep").set_defaults(func=cmd_single_shock)
    m = sub.add_parser("metrics", parents=[common], help="forecast errors of two monthly panels")
    m.add_argument("model_csv", type=Path)
    m.add_argument("data_csv", type=Path)
    m.add_argument("--months", help="comma-separated YYYY-MM list (default Apr-Jun 2020)")
    m.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: missing file {exc.filename}", file=sys.stderr)
        return EXIT_INVALID
    except (ModelError, ProdNetError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
