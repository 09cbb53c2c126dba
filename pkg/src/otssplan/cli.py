"""Command-line front end.

Subcommands: plan, validate, sweep, emit-lp, gen-traffic, timeline,
fixtures. Exit codes: 0 success, 1 validation failure, 2 usage error,
3 internal error. All randomness flows through explicit --seed flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, milp, solve as solve_mod, timeline, validate as validate_mod
from .model import (Instance, collapse_frame, load_instance, serialize_instance,
                    topology_from_document)
from .solve import SolveLimits, schedule_from_document

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _load_instance_file(path: str) -> Instance:
    return load_instance(_read_json(path))


def _write_json(doc, path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _limits_from_args(args) -> SolveLimits:
    return SolveLimits(node_budget=args.node_budget,
                       time_budget_s=args.time_budget,
                       k_paths=args.k_paths)


def _add_limit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--node-budget", type=int, default=1_000_000)
    parser.add_argument("--time-budget", type=float, default=300.0,
                        help="solver wall-clock budget in seconds")
    parser.add_argument("--k-paths", type=int, default=4,
                        help="shortest-path candidates per request")


def cmd_plan(args) -> int:
    instance = _load_instance_file(args.instance)
    schedule = solve_mod.solve(instance, args.solver, _limits_from_args(args))
    print(f"throughput_gbps={schedule.throughput_gbps:g} "
          f"lambda_count={schedule.lambda_count} optimal={schedule.optimal}")
    if args.output:
        Path(args.output).write_text(schedule.to_json() + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = _load_instance_file(args.instance)
    if args.baseline:
        instance = collapse_frame(instance)
    schedule = schedule_from_document(_read_json(args.schedule))
    try:
        report = validate_mod.check_schedule(instance, schedule)
    except validate_mod.StructureError as exc:
        print(f"structural error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_sweep(args) -> int:
    instance = _load_instance_file(args.instance)
    loads = [float(x) for x in args.loads.split(",") if x]
    solvers = [s for s in args.solvers.split(",") if s]
    result = harness.run_sweep(instance, loads, solvers, args.trials, args.seed,
                               limits=_limits_from_args(args))
    result.to_csv(args.output)
    meta_path = Path(args.output).with_suffix(".meta.json")
    meta_path.write_text(json.dumps(result.metadata(), sort_keys=True, indent=2) + "\n")
    for load, solver, mean_tp in result.averages:
        print(f"load={load:g} solver={solver} mean_throughput_gbps={mean_tp:g}")
    return EXIT_OK


def cmd_emit_lp(args) -> int:
    instance = _load_instance_file(args.instance)
    if args.objective:
        from dataclasses import replace
        from .model import ObjectiveMode
        planner = replace(instance.planner, objective_mode=ObjectiveMode(kind=args.objective))
        instance = replace(instance, planner=planner)
    model = milp.build_model(instance)
    phase1_value = args.phase1_value
    if model.two_phase and phase1_value is None and instance.requests:
        # pin phase 2 to the actual optimum when it is cheap to compute
        phase1_value = solve_mod.solve_exact(instance, _limits_from_args(args)).throughput_gbps
    paths = milp.emit_lp(model, args.output, phase1_value=phase1_value)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_gen_traffic(args) -> int:
    doc = _read_json(args.instance)
    topo_doc = doc["topology"] if isinstance(doc, dict) and "topology" in doc else doc
    topology = topology_from_document(topo_doc)
    requests = harness.gen_uniform_traffic(topology, args.load,
                                           granularity_gbps=args.granularity,
                                           seed=args.seed, capacity_gbps=args.capacity)
    _write_json([{"id": r.id, "src": r.source, "dst": r.destination,
                  "bandwidth_gbps": r.bandwidth_gbps} for r in requests], args.output)
    return EXIT_OK


def cmd_timeline(args) -> int:
    instance = _load_instance_file(args.instance)
    schedule = schedule_from_document(_read_json(args.schedule))
    link = None
    if args.link:
        src, _, dst = args.link.partition(":")
        link = (src, dst)
    print(timeline.render_timeline(instance, schedule, link))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    instance = harness.fixture_instance(args.name)
    _write_json(serialize_instance(instance), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otssplan",
        description="Crosstalk-aware time-slice planner for multi-mode-fiber "
                    "datacenter networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve an instance and write the schedule")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--solver", choices=solve_mod.SOLVERS, default="exact")
    p.add_argument("-o", "--output")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a schedule against an instance")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-s", "--schedule", required=True)
    p.add_argument("--baseline", action="store_true",
                   help="collapse the frame to one slot before checking")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="offered-load sweep comparing solvers")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("--loads", required=True, help="comma-separated Gb/s values")
    p.add_argument("--solvers", default="exact,baseline")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", default="0")
    p.add_argument("-o", "--output", required=True, help="results CSV path")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("emit-lp", help="write the MIP as LP-format text")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--objective", choices=["lexicographic", "weighted"])
    p.add_argument("--phase1-value", type=float,
                   help="throughput to pin in the phase-2 model")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_emit_lp)

    p = sub.add_parser("gen-traffic", help="generate seeded uniform traffic")
    p.add_argument("-i", "--instance", required=True,
                   help="instance or bare topology JSON")
    p.add_argument("--load", type=float, required=True)
    p.add_argument("--granularity", type=float, default=1.0)
    p.add_argument("--capacity", type=float, default=10.0)
    p.add_argument("--seed", default="0")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_traffic)

    p = sub.add_parser("timeline", help="render a link's slot grid")
    p.add_argument("-i", "--instance", required=True)
    p.add_argument("-s", "--schedule", required=True)
    p.add_argument("--link", help="FROM:TO (default: first occupied link)")
    p.set_defaults(func=cmd_timeline)

    p = sub.add_parser("fixtures", help="write a bundled fixture instance")
    p.add_argument("--name", required=True, choices=harness.FIXTURES)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fixtures)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (validate_mod.StructureError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
