"""Command-line front end: batch topology export, single runs, algorithm
comparison matrices, and the gradient validation suite.

Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
SLICESIM_LOG in {error, info, debug} controls verbosity.
"""

from __future__ import annotations

import argparse
import copy
import csv
import logging
import os
import statistics
import sys

from . import engine, metrics, substrate
from .agent import grad_check_suite
from .config import ALGORITHMS, SimConfig, load_config
from .errors import ConfigError, SliceSimError

log = logging.getLogger("slicesim")


def _setup_logging():
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("SLICESIM_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_config(args) -> SimConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else SimConfig().validate()
    if getattr(args, "algo", None):
        cfg.run.algorithm = args.algo
    if getattr(args, "seed", None) is not None:
        cfg.run.seed = args.seed
    if getattr(args, "arrivals", None) is not None:
        cfg.run.arrivals = args.arrivals
    return cfg.validate()


def _cmd_topology(args) -> int:
    cfg = _load_config(args)
    net = substrate.build_topology(cfg.topology)
    metrics.export_dot(net, path=args.out)
    print(f"wrote {args.out}: {len(net.data_centers)} DCs, "
          f"{len(net.servers)} servers, {len(net.links)} links")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    os.makedirs(args.out_dir, exist_ok=True)
    report = engine.run(cfg)
    metrics.export_csv(report.series, args.out_dir)
    net = substrate.build_topology(cfg.topology)  # fresh snapshot of the topology
    metrics.export_dot(net, path=os.path.join(args.out_dir, "psn.dot"))
    print(f"accepted/total={report.cumulative_acceptance:.6f}")
    log.info("run %s seed=%d arrivals=%d wall=%.0fms median_decision=%.2fms",
             cfg.run.algorithm, cfg.run.seed, cfg.run.arrivals,
             report.wall_ms, report.latency_median_ms())
    return 0


def _cmd_compare(args) -> int:
    base = _load_config(args)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    seeds = [int(s) for s in args.seeds.split(",")]
    if not algos or not seeds:
        raise ConfigError("compare needs at least one algorithm and one seed")
    for algo in algos:
        if algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
    os.makedirs(args.out_dir, exist_ok=True)

    rows = []
    for seed in seeds:
        configs = []
        for algo in algos:
            cfg = copy.deepcopy(base)
            cfg.run.algorithm = algo
            cfg.run.seed = seed
            configs.append(cfg.validate())
        result = engine.compare(configs, jobs=args.jobs)
        for idx, (label, report) in enumerate(result.runs):
            run_dir = os.path.join(args.out_dir, f"{label}_seed{seed}")
            os.makedirs(run_dir, exist_ok=True)
            metrics.export_csv(report.series, run_dir)
            rows.append(result.summary_rows()[idx])

    summary_path = os.path.join(args.out_dir, "summary.csv")
    with open(summary_path, "w", newline="\n") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["algo", "seed", "arrivals", "cumulative_acceptance",
                         "mean_reward", "wall_ms"])
        for row in rows:
            writer.writerow([row["algo"], row["seed"], row["arrivals"],
                             f"{row['cumulative_acceptance']:.6f}",
                             f"{row['mean_reward']:.6f}", f"{row['wall_ms']:.3f}"])

    print(f"{'algo':<8} {'mean_acc':>10} {'std_acc':>10} {'runs':>5}")
    for algo in algos:
        accs = [r["cumulative_acceptance"] for r in rows if r["algo"] == algo]
        std = statistics.stdev(accs) if len(accs) > 1 else 0.0
        print(f"{algo:<8} {statistics.mean(accs):>10.6f} {std:>10.6f} {len(accs):>5}")
    print(f"wrote {summary_path}")
    return 0


def _cmd_gradcheck(args) -> int:
    worst = grad_check_suite(n_configs=args.trials, seed=args.seed or 0)
    print(f"max relative error over {args.trials} configurations: {worst:.3e}")
    if worst > 1e-4:
        print("slicesim: error: gradient check exceeded 1e-4", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slicesim",
                                     description="network slice placement simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("topology", help="build the substrate and export a DOT view")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", default="psn.dot", help="output DOT path")
    p.set_defaults(func=_cmd_topology)

    p = sub.add_parser("run", help="single simulation run")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--algo", choices=ALGORITHMS, help="override [run] algorithm")
    p.add_argument("--seed", type=int, help="override [run] seed")
    p.add_argument("--arrivals", type=int, help="override [run] arrivals")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="matrix of runs over algorithms x seeds")
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--algos", required=True, help="comma-separated algorithm list")
    p.add_argument("--seeds", required=True, help="comma-separated seed list")
    p.add_argument("--arrivals", type=int, help="override [run] arrivals")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs per seed")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("gradcheck", help="numerical gradient validation suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors with code 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"slicesim: config error: {exc}", file=sys.stderr)
        return 2
    except (SliceSimError, OSError) as exc:
        print(f"slicesim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
