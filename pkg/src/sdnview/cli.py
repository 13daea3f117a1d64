"""Command line: ``sdnview run|sweep|list``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness import (
    METRICS,
    SweepError,
    emit_run,
    emit_sweep,
    fmt,
    override,
    run_scenario,
    run_sweep,
)
from .scenario import ENGINES, ScenarioError, bundled_scenarios, load_scenario


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdnview", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("run", "run one scenario, ignoring any sweep"),
                       ("sweep", "run every point of a scenario's sweep")):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario", help="path to a .scn file or a bundled scenario name")
        p.add_argument("--seed", type=int, help="base seed (default from the file)")
        p.add_argument("--runs", type=int, help="independent runs (default from the file)")
        p.add_argument("--engine", choices=ENGINES, help="event simulator or recurrence model")
        p.add_argument("--horizon", type=float, help="simulated seconds")
        p.add_argument("--out-dir", type=Path, default=Path("results"))
        p.add_argument("--jobs", type=int, default=1, help="worker processes for runs")
        p.add_argument("--check", action="store_true", help="assert engine invariants each window")

    sub.add_parser("list", help="list bundled scenarios")
    return parser


def _list() -> int:
    for path in bundled_scenarios():
        try:
            s = load_scenario(path)
        except ScenarioError as exc:
            print(f"{path.stem}\tINVALID\t{exc}")
            continue
        sweep = f"{s.sweep.parameter}={' '.join(fmt(v) for v in s.sweep.values)}" if s.sweep else "-"
        print(f"{s.name}\t{s.engine}\t{s.traffic.profile}\t{sweep}\t{s.description}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "list":
        return _list()

    try:
        scenario = override(load_scenario(args.scenario), seed=args.seed, runs=args.runs,
                            engine=args.engine, horizon=args.horizon)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "run":
        try:
            series = run_scenario(scenario, jobs=args.jobs, check_invariants=args.check)
        except Exception as exc:
            print(f"error: {scenario.name}: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
        for path in emit_run(args.out_dir, scenario, series):
            print(path)
        print("\t".join(f"{m}={fmt(series.scalar(m))}" for m in METRICS))
        return 0

    if scenario.sweep is None:
        print(f"error: {scenario.name} has no [sweep] section", file=sys.stderr)
        return 2
    try:
        result = run_sweep(scenario, jobs=args.jobs, check_invariants=args.check)
        status = 0
    except SweepError as exc:
        result = exc.partial
        print(f"error: {scenario.name}: {exc} (partial results written)", file=sys.stderr)
        status = 1
    for path in emit_sweep(args.out_dir, result):
        print(path)
    print("\t".join([result.parameter, *METRICS]))
    for point in result.points:
        print("\t".join([fmt(point.value), *(fmt(point.metric(m)) for m in METRICS)]))
    return status


if __name__ == "__main__":
    sys.exit(main())
