"""Command line entry point: ``appc run | gen-map | gen-instance | replay``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import BenchmarkConfig, BenchmarkError, emit, run_benchmark
from .grid import GridMap
from .instance_gen import FAMILIES, generate_instance, generate_map, parse_ratio, save_instance, spawn_spec
from .replay import check_trace_file, read_trace

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


def cmd_run(args) -> int:
    config = BenchmarkConfig.load(args.config)
    table = run_benchmark(config, workers=args.workers, trace_dir=args.trace_dir)
    text = emit(table, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen_map(args) -> int:
    grid = generate_map(args.family, args.width, args.height, args.seed)
    grid.save(args.out)
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    grid = GridMap.load(args.map)
    spec = spawn_spec(grid, args.attackers, parse_ratio(args.ratio), args.seed)
    inst = generate_instance(
        grid,
        spec,
        r=args.r,
        step_limit=args.step_limit,
        communicator_ratio=args.communicator_ratio,
        sim_draws=args.sim_draws,
    )
    save_instance(inst, args.out, args.map)
    return EXIT_OK


def cmd_replay(args) -> int:
    if not args.check_invariants:
        trace = read_trace(args.trace)
        print(f"{args.trace}: {len(trace.configs)} configurations")
        return EXIT_OK
    grid = GridMap.load(args.map) if args.map else None
    issues = check_trace_file(args.trace, grid, args.r)
    for issue in issues:
        print(issue)
    if issues:
        print(f"{len(issues)} invariant violation(s) in {args.trace}", file=sys.stderr)
        return EXIT_INVARIANT
    print(f"{args.trace}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="appc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark config and print the result table")
    p.add_argument("--config", required=True, help="JSON benchmark config")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace-dir", help="write one trace file per episode here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen-map", help="generate a map of one family")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=40)
    p.add_argument("--height", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_map)

    p = sub.add_parser("gen-instance", help="place agents and targets on a map")
    p.add_argument("--map", required=True)
    p.add_argument("--ratio", required=True, help="defenders:attackers, e.g. 1:2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--attackers", type=int, default=50)
    p.add_argument("--r", type=int, default=5)
    p.add_argument("--step-limit", type=int, default=150)
    p.add_argument("--communicator-ratio", type=float, default=0.2)
    p.add_argument("--sim-draws", type=int, default=1)
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("replay", help="load a trace and optionally check its invariants")
    p.add_argument("--trace", required=True)
    p.add_argument("--check-invariants", action="store_true")
    p.add_argument("--map", help="map file (default: the one named in the trace header)")
    p.add_argument("--r", type=int, help="visibility range (default: from the trace header)")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (BenchmarkError, ValueError, OSError) as exc:
        # ConfigError, GridError and GenerationError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
