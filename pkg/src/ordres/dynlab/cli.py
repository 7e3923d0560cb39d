"""Command-line front end: ``dynlab <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import (
    ConfigInvalid,
    DegenerateMap,
    IterationBudgetExceeded,
    NotProbability,
    OrdResError,
    PartialCoverage,
    RamificationNeeded,
    TypeISupport,
    UnlocatableFixedPoints,
)
from .config import load_config, validate_config
from .runner import export_csv, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_BUDGET = 4

# errors that describe an input outside what the computation supports
INPUT_ERRORS = (
    ConfigInvalid,
    DegenerateMap,
    PartialCoverage,
    RamificationNeeded,
    TypeISupport,
    UnlocatableFixedPoints,
    NotProbability,
)


def _add_map_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--map", help="map JSON file ({p, e, d, F, G}) or preset:<name>")
    sub.add_argument("--preset", help="built-in map: haar, quadratic or square")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p", type=int, default=3, help="prime for presets and bare measures")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", help="write the JSON report here instead of stdout")
    sub.add_argument("--csv", help="also write the rows as CSV")
    sub.add_argument("--timing", action="store_true", help="include elapsed time in the report")
    sub.add_argument("--precision", type=int, default=12, help="digits of the decimal renderings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynlab", description="Exact resultant-function experiments")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("green-eval", help="normalised ordRes ladder at a point")
    _add_map_options(sub)
    sub.add_argument("--point", required=True, help='type II point, e.g. "0@1"')
    sub.add_argument("--n-max", type=int, required=True)
    sub.add_argument("--C", help="constant for the error bound (rational)")
    _add_common(sub)

    sub = subs.add_parser("crucial-measure", help="crucial measure of an iterate")
    _add_map_options(sub)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--route", choices=["laplacian", "weights", "both"], default="laplacian")
    _add_common(sub)

    sub = subs.add_parser("equidist", help="integrals against crucial measures versus a reference")
    _add_map_options(sub)
    sub.add_argument("--graph", required=True, help="JSON file with the graph vertices")
    sub.add_argument("--f", required=True, help="JSON file with the CPA function")
    sub.add_argument("--n-max", type=int, required=True)
    sub.add_argument("--n-min", type=int)
    sub.add_argument("--reference", help="haar, gauss or a measure JSON file")
    sub.add_argument("--C")
    _add_common(sub)

    sub = subs.add_parser("barycenter", help="barycenter of a discrete measure")
    sub.add_argument("--measure", required=True, help="measure JSON file")
    sub.add_argument("--e", type=int, help="ramification index of the measure's field")
    _add_common(sub)

    sub = subs.add_parser("minresloc", help="minimal resultant locus of an iterate")
    _add_map_options(sub)
    sub.add_argument("--n", type=int, required=True)
    _add_common(sub)

    sub = subs.add_parser("containment", help="distance from MinResLoc to a reference barycenter")
    _add_map_options(sub)
    sub.add_argument("--bary", required=True, help='one or two points, e.g. "1@1,-1@1"')
    sub.add_argument("--eps", required=True)
    sub.add_argument("--n-max", type=int, required=True)
    sub.add_argument("--n-min", type=int)
    _add_common(sub)

    sub = subs.add_parser("verify", help="seeded property suites")
    sub.add_argument("--suite", required=True, choices=["metric", "resfunc", "crucial", "all"])
    sub.add_argument("--trials", type=int)
    _add_common(sub)

    sub = subs.add_parser("run", help="run a JSON experiment configuration")
    sub.add_argument("config", help="configuration file")
    sub.add_argument("--out")
    sub.add_argument("--csv")
    return parser


def _namespace_to_config(args: argparse.Namespace) -> dict:
    data = {k.replace("-", "_"): v for k, v in vars(args).items() if v is not None}
    if data.get("timing") is False:
        data.pop("timing")
    for key, default in (("p", 3), ("seed", 0), ("precision", 12)):
        if data.get(key) == default:
            data.pop(key)
    return data


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            overrides = {k: v for k, v in (("out", args.out), ("csv", args.csv)) if v}
            if overrides:
                cfg = validate_config({**cfg.raw, **overrides})
        else:
            cfg = validate_config(_namespace_to_config(args))
        report = run_experiment(cfg)
    except IterationBudgetExceeded as exc:
        print(f"dynlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except INPUT_ERRORS as exc:
        print(f"dynlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OrdResError as exc:
        print(f"dynlab: invariant violation ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"dynlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = report.dumps()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.csv:
        export_csv(report, cfg.csv)
    return EXIT_OK if report.ok else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
