"""Command line interface: simulate, compare, check."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import check as checkmod
from . import export
from .sim import FILTER_NAMES, ConfigError, SimConfig, monte_carlo, run_experiment


def _load_config(path, seed=None, filters=None):
    cfg = SimConfig.from_toml(path) if path else SimConfig()
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if filters is not None:
        cfg = replace(cfg, filters=tuple(filters))
    return cfg


def _cmd_simulate(args):
    cfg = _load_config(args.config, args.seed)
    os.makedirs(args.out, exist_ok=True)
    record = run_experiment(cfg, run_index=0)
    csv_path = os.path.join(args.out, "run.csv")
    svg_path = os.path.join(args.out, "run.svg")
    export.write_csv(csv_path, [record], filters=cfg.filters)
    export.write_svg(svg_path, record.t, export.run_curves(record),
                     title=f"single run, seed {cfg.seed}")
    for name, track in record.tracks.items():
        final = "diverged at t=%.2f" % track.diverged_at \
            if track.diverged_at is not None \
            else "final pos err %.3f m, vel err %.3f m/s" % (track.pos_err[-1],
                                                             track.vel_err[-1])
        print(f"{name}: {final}")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _cmd_compare(args):
    filters = [f.strip() for f in args.filters.split(",") if f.strip()]
    cfg = _load_config(args.config, args.seed, filters)
    os.makedirs(args.out, exist_ok=True)
    records, agg = monte_carlo(cfg, args.runs)
    csv_path = os.path.join(args.out, "compare.csv")
    svg_path = os.path.join(args.out, "compare.svg")
    export.write_csv(csv_path, records, filters=cfg.filters)
    export.write_svg(svg_path, agg.t, export.aggregate_curves(agg),
                     title=f"mean over {args.runs} runs, seed {cfg.seed}")
    tail = agg.t >= 5.0
    if not tail.any():  # short runs: report over the second half instead
        tail = agg.t >= agg.t[-1] / 2.0
    print(f"{args.runs} runs, seed {cfg.seed}")
    for name in cfg.filters:
        pos = float(np.nanmean(agg.mean_pos_err[name][tail]))
        vel = float(np.nanmean(agg.mean_vel_err[name][tail]))
        en = float(np.nanmean(agg.mean_energy[name][tail]))
        div = agg.divergences[name]
        extra = f", {div} diverged" if div else ""
        print(f"{name}: settled pos err {pos:.3f} m, vel err {vel:.3f} m/s, "
              f"energy {en:.3f}{extra}")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _cmd_check(args):
    results = checkmod.run_checks()
    print(checkmod.format_results(results))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eqf",
        description="Bearing/range target tracking with a symmetry-based filter.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one simulation and export it")
    p_sim.add_argument("--config", default=None, help="TOML config file")
    p_sim.add_argument("--seed", type=int, default=None, help="override config seed")
    p_sim.add_argument("--out", default="out", help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="Monte-Carlo comparison of filters")
    p_cmp.add_argument("--filters", default=",".join(FILTER_NAMES),
                       help="comma-separated filter names")
    p_cmp.add_argument("--runs", type=int, default=100, help="number of runs")
    p_cmp.add_argument("--config", default=None, help="TOML config file")
    p_cmp.add_argument("--seed", type=int, default=None, help="override config seed")
    p_cmp.add_argument("--out", default="out", help="output directory")
    p_cmp.set_defaults(func=_cmd_compare)

    p_chk = sub.add_parser("check", help="run library self-diagnostics")
    p_chk.set_defaults(func=_cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
