"""Command line entry point.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 physics
error (e.g. a wavelength too long for the chosen reflection).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import config as cfg
from . import report
from .errors import ConfigInvalid, PhysicsError
from .loop import compare_modes, run_cow_loop

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3


def _source_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="key = value config file")
    src.add_argument("--preset", metavar="NAME", help="built-in or COWKIN_PRESET_DIR preset (default paper-2013)")
    p.add_argument("--out", metavar="PATH", help="output file")
    p.add_argument("--trace", action="store_true", help="include the per-event wave-vector dump")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cowkin",
        description="Wave-vector bookkeeping for neutron and atom interferometers in gravity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paper-table", help="computed vs. quoted numbers for the COW setup")
    _source_args(p)

    p = sub.add_parser("sweep", help="scan one numeric config key, write CSV")
    _source_args(p)
    p.add_argument("--key", required=True, help="numeric config key, e.g. physics.g")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True, help="number of grid points (>= 2)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")

    p = sub.add_parser("compare", help="neutron vs. atom loop residuals as JSON")
    _source_args(p)
    return parser


def sweep_points(start: float, stop: float, steps: int) -> list[float]:
    if steps < 2:
        raise ConfigInvalid(f"--steps must be at least 2, got {steps}")
    points = [start + (stop - start) * i / (steps - 1) for i in range(steps)]
    points[-1] = stop
    return points


def _paper_table(args) -> int:
    run = cfg.load(args.config, args.preset)
    result = run_cow_loop(run.cow_config())
    sys.stdout.write(report.format_table(result))
    if args.out:
        report.write_atomic(args.out, report.dumps(report.loop_document("paper-table", run, result, args.trace)))
    return EXIT_OK


def _sweep(args) -> int:
    if not args.out:
        raise ConfigInvalid("sweep needs --out PATH")
    if args.jobs < 1:
        raise ConfigInvalid("--jobs must be positive")
    base = cfg.load_values(args.config, args.preset)
    points = sweep_points(args.start, args.stop, args.steps)
    runs = [cfg.resolve(cfg.with_override(base, args.key, x)) for x in points]

    def one(run):
        return run_cow_loop(run.cow_config())

    if args.jobs == 1:
        results = [one(r) for r in runs]
    else:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(one, runs))
    report.write_atomic(args.out, report.sweep_csv(args.key, points, results))
    return EXIT_OK


def _compare(args) -> int:
    run = cfg.load(args.config, args.preset)
    result = compare_modes(run.cow_config(), run.atom_config())
    text = report.dumps(report.comparison_document(run, result, args.trace))
    sys.stdout.write(text)
    if args.out:
        report.write_atomic(args.out, text)
    return EXIT_OK


COMMANDS = {"paper-table": _paper_table, "sweep": _sweep, "compare": _compare}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"cowkin {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"cowkin {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
