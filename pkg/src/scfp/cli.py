"""Command-line front end.

Subcommands::

    scfp run --config CFG --output OUT.csv [--max-iter N] [--tol T]
    scfp reproduce {table1,table2} --output DIR [--max-iter N]
    scfp compare CFG_A CFG_B --output OUT.csv [--max-iter N] [--tol T]
    scfp check {geometry,operators,solver} [--seed S]

Exit status is 0 on success, 2 for configuration or schedule errors and 3
for numerical failures (empty shrinking set, non-finite iterate, inner
solver divergence).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checks import SUITES
from .config import ConfigError, build_problem, load_config
from .operators import ContractionError
from .projections import InfeasibleSetError
from .solvers import NumericalFailure, ScheduleError, run
from .tables import (TARGETS, compare_traces, reproduce, result_table,
                     write_plot_data, write_table)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _load(path, args):
    cfg = load_config(path)
    return cfg, build_problem(cfg, max_iter=args.max_iter, step_tol=args.tol)


def cmd_run(args) -> int:
    cfg, problem = _load(args.config, args)
    trace = run(problem)
    header, rows = result_table(trace)
    write_table(args.output, header, rows)
    if cfg.output["plot_data"]:
        write_plot_data(Path(args.output).with_suffix(".dat"), trace)
    print(f"{len(trace.records)} iterations ({trace.reason}); "
          f"wrote {args.output}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    max_iter = 24 if args.max_iter is None else args.max_iter
    traces = reproduce(args.target, args.output, max_iter=max_iter)
    print(f"wrote {args.target}.csv and {len(traces)} plot files to {args.output}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg_a, pa = _load(args.config_a, args)
    cfg_b, pb = _load(args.config_b, args)
    threshold = cfg_a.stop["residual_tol"] or 1e-6
    labels = (cfg_a.output["label"], cfg_b.output["label"])
    if labels[0] == labels[1]:
        labels = (labels[0] + "_a", labels[1] + "_b")
    header, rows, summary, _ = compare_traces(run(pa), run(pb), threshold, labels)
    write_table(args.output, header, rows, comments=[summary])
    print(summary)
    return EXIT_OK


def cmd_check(args) -> int:
    results = SUITES[args.suite](seed=args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scfp",
        description="Inertial shrinking-projection solvers for split common "
                    "fixed point problems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--max-iter", type=int, default=None,
                       help="override the iteration budget")
        p.add_argument("--tol", type=float, default=None,
                       help="override the step tolerance ||x_{n+1} - x_n||")

    p = sub.add_parser("run", help="solve one configured problem")
    p.add_argument("--config", required=True, help="TOML problem file")
    p.add_argument("--output", required=True, help="CSV result table")
    overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="regenerate a benchmark table")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--output", default=".", help="output directory")
    p.add_argument("--max-iter", type=int, default=None,
                   help="iterations per column (default 24, i.e. up to x_25)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("compare", help="run two problems side by side")
    p.add_argument("config_a")
    p.add_argument("config_b")
    p.add_argument("--output", required=True, help="CSV comparison table")
    overrides(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check", help="run a property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleSetError, NumericalFailure, ContractionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
