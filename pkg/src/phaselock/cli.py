"""Command-line interface.

Subcommands:

  run-local       local fixed-depth Monte Carlo grid -> CSV + JSON + manifest
  run-global      global single-scale (aliasing) dataset
  run-multiscale  coarse-to-fine cascade sweep
  certify         certificate scales for one or more halting streaks
  fisher          one-bit Fisher information along a mismatch grid
  fit             log-log OLS on two columns of an emitted CSV

Runs are reproducible: the master seed (flag, else PHASELOCK_SEED, else the
built-in default) plus the resolved config fix every output byte, for any
--threads value.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import cert_scale, cert_scale_asymptotic, fisher_matching_curve, param_certificate
from .experiments import (
    DEFAULT_SEED,
    GlobalConfig,
    LocalConfig,
    MultiscaleConfig,
    cells_from_global_batches,
    cells_from_local_batches,
    global_batches,
    global_fits,
    local_batches,
    local_fits,
    multiscale_fits,
    run_multiscale,
)
from .probes import NoonProbe
from .reporting import (
    CONFIG_TYPES,
    RunManifest,
    config_to_text,
    file_digest,
    fmt,
    load_config_file,
    read_table,
    utc_now,
    write_cells_csv,
    write_json,
    write_manifest,
    write_multiscale_csv,
)
from .stats import ols_loglog

SEED_ENV = "PHASELOCK_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    if seed < 0:
        raise ValueError(f"{SEED_ENV} must be non-negative, got {seed}")
    return seed


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_run_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, default=None,
                     help="config file (key = value, JSON config, or a run manifest)")
    sub.add_argument("--out-dir", type=Path, default=Path("results"),
                     help="output directory (default: results/)")
    sub.add_argument("--trials", type=int, default=None, help="trials per cell")
    sub.add_argument("--seed", type=int, default=None,
                     help=f"master seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    sub.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="worker threads (results do not depend on this)")
    sub.add_argument("--max-shots", type=int, default=None, help="per-trajectory shot budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaselock",
        description="One-bit adaptive phase locking: Monte Carlo datasets, "
                    "run-length certificates, and Fisher-matching tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("run-local", help="local fixed-depth dataset")
    _add_run_options(p)
    p.add_argument("--depths", type=_int_list, default=None, help="comma list, e.g. 1,2,4,8")
    p.add_argument("--halts", type=_int_list, default=None, help="comma list, e.g. 20,40,80")
    p.set_defaults(func=cmd_run_local)

    p = commands.add_parser("run-global", help="global single-scale dataset")
    _add_run_options(p)
    p.add_argument("--depth", type=int, default=None, help="entanglement depth (default 8)")
    p.add_argument("--halts", type=_int_list, default=None)
    p.set_defaults(func=cmd_run_global)

    p = commands.add_parser("run-multiscale", help="coarse-to-fine cascade sweep")
    _add_run_options(p)
    p.add_argument("--max-stage", type=int, default=None, help="deepest stage J (default 7)")
    p.add_argument("--m-halt", type=int, default=None, help="per-stage halting streak (default 320)")
    p.set_defaults(func=cmd_run_multiscale)

    p = commands.add_parser("certify", help="certificate scales for halting streaks")
    p.add_argument("--m-halt", type=_int_list, required=True, help="comma list of streak lengths")
    p.add_argument("--eta", type=float, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--qfi", type=float, default=None,
                   help="probe Fisher information; adds the parameter column")
    p.add_argument("--csv", type=Path, default=None, help="also write the table as CSV")
    p.set_defaults(func=cmd_certify)

    p = commands.add_parser("fisher", help="one-bit Fisher information vs mismatch")
    p.add_argument("--depth", type=int, required=True, help="probe depth m")
    p.add_argument("--delta-min", type=float, default=1e-4)
    p.add_argument("--delta-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=61, help="log-spaced grid size")
    p.add_argument("--deltas", type=str, default=None,
                   help="explicit comma list of mismatches (overrides the grid)")
    p.add_argument("--method", choices=("analytic", "fd"), default="analytic")
    p.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_fisher)

    p = commands.add_parser("fit", help="log-log OLS on two CSV columns")
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--x", required=True, help="x column name")
    p.add_argument("--y", required=True, help="y column name")
    p.set_defaults(func=cmd_fit)

    return parser


def _resolve_config(args, kind: str, overrides: dict):
    """Config file (if given) + flag overrides + seed resolution."""
    if args.config is not None:
        config = load_config_file(args.config)
        expected = CONFIG_TYPES[kind]
        if not isinstance(config, expected):
            raise ValueError(
                f"{args.config}: dataset {type(config).__name__} does not match run-{kind}"
            )
    else:
        config = CONFIG_TYPES[kind]()
    changes = {k: v for k, v in overrides.items() if v is not None}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.max_shots is not None:
        changes["max_shots"] = args.max_shots
    if args.seed is not None:
        changes["master_seed"] = args.seed
    elif args.config is None and "master_seed" not in changes:
        changes["master_seed"] = _default_seed()
    return dataclasses.replace(config, **changes) if changes else config


def _finish_run(args, kind, config, csv_name, write_csv, summary):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = summary.pop("_started")
    csv_path = out_dir / csv_name
    write_csv(csv_path)
    summary_path = out_dir / f"{kind}_summary.json"
    write_json(summary_path, {
        "tool": "phaselock",
        "version": __version__,
        "dataset": kind,
        "config": dataclasses.asdict(config),
        "cells_csv": csv_name,
        **summary,
    })
    manifest = RunManifest(
        tool="phaselock",
        version=__version__,
        dataset=kind,
        config=dataclasses.asdict(config),
        master_seed=config.master_seed,
        threads=args.threads,
        started=started,
        finished=utc_now(),
        outputs={p.name: file_digest(p) for p in (csv_path, summary_path)},
    )
    write_manifest(out_dir / f"{kind}_manifest.json", manifest)
    print(f"wrote {csv_path}, {summary_path}, {out_dir / f'{kind}_manifest.json'}")


def _print_slope(label: str, fit) -> None:
    if fit is not None:
        print(f"{label}: {fit.slope:+.4f}")


def cmd_run_local(args) -> int:
    config = _resolve_config(args, "local", {"depths": args.depths, "halts": args.halts})
    started = utc_now()
    batches = local_batches(config, threads=args.threads)
    cells = cells_from_local_batches(config, batches)
    fits = local_fits(cells)
    eta = 0.05
    exceedance = {
        str(mh): float((batches[(config.depths[0], mh)].terminal_eps[
            batches[(config.depths[0], mh)].halted] > cert_scale(mh, eta)).mean())
        for mh in config.halts
    }
    summary = {
        "_started": started,
        "fits": fits,
        "cert_exceedance": {"eta": eta, "fraction_by_m_halt": exceedance},
    }
    _finish_run(args, "local", config, "local_cells.csv",
                lambda p: write_cells_csv(p, cells), summary)
    _print_slope("eps vs nu slope", fits["eps_vs_nu"])
    for m, fit in fits["rmse_theta_vs_r_total_by_depth"].items():
        _print_slope(f"rmse vs R slope (m={m})", fit)
    _print_slope("sqrt(R)*rmse vs m slope", fits["sqrt_r_rmse_vs_depth"])
    return 0


def cmd_run_global(args) -> int:
    config = _resolve_config(args, "global", {"depth": args.depth, "halts": args.halts})
    started = utc_now()
    batches = global_batches(config, threads=args.threads)
    cells = cells_from_global_batches(config, batches)
    fits = global_fits(cells)
    summary = {"_started": started, "fits": fits}
    _finish_run(args, "global", config, "global_cells.csv",
                lambda p: write_cells_csv(p, cells), summary)
    _print_slope("eps vs R slope", fits["eps_vs_r_total"])
    _print_slope("rmse vs R slope", fits["rmse_theta_vs_r_total"])
    _print_slope("rmse vs R slope (top half)", fits["rmse_theta_vs_r_total_top_half"])
    return 0


def cmd_run_multiscale(args) -> int:
    config = _resolve_config(
        args, "multiscale", {"max_stage": args.max_stage, "m_halt": args.m_halt}
    )
    started = utc_now()
    results = run_multiscale(config, threads=args.threads)
    fits = multiscale_fits(results)
    summary = {
        "_started": started,
        "fits": fits,
        "stages": {str(r.stage_max): [dataclasses.asdict(s) for s in r.stages] for r in results},
    }
    _finish_run(args, "multiscale", config, "multiscale_cells.csv",
                lambda p: write_multiscale_csv(p, config.m_halt, results), summary)
    _print_slope("rmse_final vs R_tot slope", fits["rmse_final_vs_r_total"])
    return 0


def cmd_certify(args) -> int:
    rows = []
    for mh in args.m_halt:
        row = {
            "m_halt": mh,
            "eta": args.eta,
            "eps_cert": cert_scale(mh, args.eta),
            "eps_cert_asymptotic": cert_scale_asymptotic(mh, args.eta),
        }
        if args.qfi is not None:
            row["param_cert"] = param_certificate(mh, args.eta, args.qfi)
        rows.append(row)
    names = list(rows[0])
    print("  ".join(f"{n:>20}" for n in names))
    for row in rows:
        print("  ".join(f"{fmt(row[n]):>20}" for n in names))
    if args.csv is not None:
        from .reporting import _atomic_write_text, _csv_text  # same formatting as run outputs

        _atomic_write_text(args.csv, _csv_text(names, [[r[n] for n in names] for r in rows]))
        print(f"wrote {args.csv}")
    return 0


def cmd_fisher(args) -> int:
    probe = NoonProbe(args.depth)
    if args.deltas is not None:
        deltas = np.array([float(part) for part in args.deltas.split(",") if part.strip()])
    else:
        if args.delta_min <= 0 or args.delta_max <= args.delta_min:
            raise ValueError("need 0 < delta-min < delta-max")
        deltas = np.geomspace(args.delta_min, args.delta_max, args.points)
    table = fisher_matching_curve(probe, deltas, method=args.method)
    names = ("delta", "i_cl", "qfi")
    if args.out is not None:
        from .reporting import _atomic_write_text, _csv_text

        _atomic_write_text(args.out, _csv_text(names, table.tolist()))
        print(f"wrote {args.out}")
    else:
        print(",".join(names))
        for row in table:
            print(",".join(fmt(float(v)) for v in row))
    return 0


def cmd_fit(args) -> int:
    columns = read_table(args.csv)
    for name in (args.x, args.y):
        if name not in columns:
            raise ValueError(f"{args.csv}: no column {name!r}; have {sorted(columns)}")
    x = [float(v) for v in columns[args.x]]
    y = [float(v) for v in columns[args.y]]
    fit = ols_loglog(x, y)
    print(json.dumps({"x": args.x, "y": args.y, **fit.to_dict()}, indent=2))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"phaselock: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
