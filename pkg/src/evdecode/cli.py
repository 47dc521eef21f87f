"""Command-line front end.

Standard output carries only ``key=value`` lines (or raw data when no
output file is given); diagnostics go to standard error.  Exit codes:
0 success, 1 infeasible decode or failed validation, 2 usage error,
3 I/O or parse error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import charging_graph, fixed_route, fp_fla, harness
from .io_formats import ParseError, format_instance, format_solution, parse_instance, parse_solution, write_results
from .model import validate
from .permgen import PermGenConfig, read_permutations, write_permutations
from .split import split

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
INSTANCE_SUFFIXES = (".evrp", ".vrp")

log = logging.getLogger("evdecode")


class UsageError(Exception):
    pass


def _emit(**pairs) -> None:
    for key, value in pairs.items():
        if isinstance(value, float):
            value = format(value, ".12g")
        sys.stdout.write(f"{key}={value}\n")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _methods(text: str) -> list[str]:
    methods = _csv_list(text)
    bad = [m for m in methods if m not in harness.METHODS]
    if bad:
        raise UsageError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(harness.METHODS)}")
    return methods


def _load_instance(path: str):
    return parse_instance(Path(path).read_text())


def _load_instances(paths: Sequence[str]):
    files = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files += sorted(f for f in path.iterdir() if f.suffix.lower() in INSTANCE_SUFFIXES)
        else:
            files.append(path)
    if not files:
        raise UsageError("no instance files found")
    return [parse_instance(f.read_text()) for f in files]


def _load_perm(text: str, index: int) -> list[int]:
    """A permutation file (line ``index``) or an inline list like ``2,0,1``."""
    path = Path(text)
    if path.exists():
        perms = read_permutations(path.read_text())
        if not 0 <= index < len(perms):
            raise UsageError(f"{text} has {len(perms)} permutation(s), index {index} requested")
        return perms[index]
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--perm is neither a file nor an index list: {text!r}") from None


def _write_out(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode())
    else:
        Path(path).write_bytes(data)
        _emit(wrote=path)


def _instance_params(args) -> harness.InstanceParams:
    return harness.InstanceParams(
        customer_count=args.customers,
        station_count=args.stations,
        battery_capacity=args.battery,
        cargo_capacity=args.cargo,
        max_demand=args.max_demand,
        consumption_rate=args.consumption,
    )


# -- subcommands --------------------------------------------------------------


def cmd_decode(args) -> int:
    instance = _load_instance(args.instance)
    perm = _load_perm(args.perm, args.perm_index)
    F = charging_graph.build(instance, eps=args.eps)
    if args.method == "fp":
        result = fp_fla.decode(instance, F, perm, eps=args.eps)
    else:
        plan = split(instance, perm)
        if args.method == "fr":
            result = fixed_route.fr_fla_decode(instance, F, plan, eps=args.eps)
        else:
            result = fixed_route.ss_fr_fla_decode(
                instance, plan, F, allow_depot_as_station=args.allow_depot_as_station, eps=args.eps
            )
    _emit(method=args.method, outcome=result.outcome)
    if not result.feasible:
        _emit(time=result.stats.wall_time, max_front=result.stats.max_front)
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(
        distance=result.distance,
        time=result.stats.wall_time,
        max_front=result.stats.max_front,
        stations=result.solution.stations_visited,
        routes=len(result.solution.routes),
    )
    if args.emit_solution:
        Path(args.emit_solution).write_text(format_solution(result.solution))
        _emit(wrote=args.emit_solution)
    return EXIT_OK


def cmd_split(args) -> int:
    instance = _load_instance(args.instance)
    plan = split(instance, _load_perm(args.perm, args.perm_index))
    if plan is None:
        _emit(outcome="infeasible")
        return EXIT_INFEASIBLE
    _emit(outcome="solved", distance=plan.total_distance, routes=len(plan.routes))
    for route in plan.routes:
        _emit(route=" ".join(map(str, route)))
    return EXIT_OK


def cmd_gen_perms(args) -> int:
    instance = _load_instance(args.instance)
    try:
        config = PermGenConfig.parse(args.perms, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    perms = config.generate(instance)
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            write_permutations(perms, fh)
        _emit(wrote=args.out, count=len(perms))
    else:
        write_permutations(perms, sys.stdout)
    return EXIT_OK


def cmd_gen_instance(args) -> int:
    instance = harness.generate_instance(_instance_params(args), args.seed, name=args.name)
    _write_out(args.out, format_instance(instance).encode())
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = tuple(float(v) for v in _csv_list(args.grid))
    spec = harness.SweepSpec(
        parameter=args.param,
        grid=grid,
        instances_per_point=args.instances_per_point,
        permutations_per_instance=args.perms_per_instance,
        base=_instance_params(args),
        seed=args.seed,
        k=args.k,
    )
    report = harness.run_front_size_sweep(spec, threads=args.threads)
    _write_out(args.out, report.to_csv())
    failures = sum(p.failures for p in report.points)
    _emit(points=len(report.points), failures=failures)
    return EXIT_OK


def cmd_compare(args) -> int:
    instances = _load_instances(args.instances)
    try:
        config = PermGenConfig.parse(args.perms, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    comp = harness.run_comparison(
        instances,
        config,
        _methods(args.methods),
        threads=args.threads,
        allow_depot_as_station=args.allow_depot_as_station,
    )
    _write_out(args.out, write_results(comp.rows, args.format))
    if args.report:
        Path(args.report).write_bytes(comp.report.to_csv())
        _emit(wrote=args.report)
    if args.ecdf:
        Path(args.ecdf).write_bytes(comp.report.ecdf_csv())
        _emit(wrote=args.ecdf)
    for s in comp.report.stats:
        _emit(**{f"{s.instance}.{s.method}.solved_pct": s.solved_pct, f"{s.instance}.{s.method}.zero_gap_pct": s.zero_gap_pct})
    for v in comp.violations:
        log.error("hierarchy violation: %s", v)
    _emit(rows=len(comp.rows), hierarchy_violations=len(comp.violations))
    return EXIT_OK


def cmd_time(args) -> int:
    instances = _load_instances(args.instances)
    try:
        config = PermGenConfig.parse(args.perms, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.repetitions < 1:
        raise UsageError("--repetitions must be >= 1")
    include_reconstruction = not args.exclude_reconstruction
    rows = harness.run_timing(
        instances,
        config,
        _methods(args.methods),
        args.repetitions,
        include_build=args.include_build,
        include_reconstruction=include_reconstruction,
    )
    _write_out(
        args.out,
        harness.timing_csv(rows, include_build=args.include_build, include_reconstruction=include_reconstruction),
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = _load_instance(args.instance)
    solution = parse_solution(Path(args.solution).read_text())
    perm = _load_perm(args.perm, args.perm_index) if args.perm else solution.customers
    violations = validate(instance, perm, solution, eps=args.eps)
    _emit(valid=str(not violations).lower(), violations=len(violations))
    for v in violations:
        _emit(violation=str(v))
    return EXIT_OK if not violations else EXIT_INFEASIBLE


# -- parser -------------------------------------------------------------------


def _add_instance_params(p) -> None:
    base = harness.InstanceParams()
    p.add_argument("--customers", type=int, default=base.customer_count)
    p.add_argument("--stations", type=int, default=base.station_count)
    p.add_argument("--battery", type=float, default=base.battery_capacity)
    p.add_argument("--cargo", type=float, default=base.cargo_capacity)
    p.add_argument("--max-demand", type=float, default=base.max_demand)
    p.add_argument("--consumption", type=float, default=base.consumption_rate)


def _add_perm(p) -> None:
    p.add_argument("--perm", required=True, help="permutation file or inline list such as 2,0,1")
    p.add_argument("--perm-index", type=int, default=0, help="line of the permutation file to use")


def _add_depot_switch(p) -> None:
    p.add_argument(
        "--no-depot-as-station",
        dest="allow_depot_as_station",
        action="store_false",
        help="single-station decoding may not stop at the depot",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evdecode", description="Electric-vehicle permutation decoders.")
    parser.add_argument("--config", help="key = value file supplying defaults for the subcommand's flags")
    parser.add_argument("--threads", type=int, default=harness.default_threads(),
                        help="worker processes (default: $EVDECODE_THREADS or CPU count)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("decode", help="decode one permutation")
    p.add_argument("--instance", required=True)
    _add_perm(p)
    p.add_argument("--method", choices=harness.METHODS, default="fp")
    p.add_argument("--emit-solution", metavar="PATH")
    p.add_argument("--eps", type=float, default=0.0, help="feasibility slack on battery and cargo checks")
    _add_depot_switch(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("split", help="capacity split of one permutation")
    p.add_argument("--instance", required=True)
    _add_perm(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("gen-perms", help="generate permutations for an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--perms", default="knn:k=2:count=1000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_perms)

    p = sub.add_parser("gen-instance", help="random unit-square instance")
    _add_instance_params(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("sweep", help="front-size parameter sweep")
    p.add_argument("--param", choices=harness.SWEEP_PARAMS, default="customer_count")
    p.add_argument("--grid", default="25,50,100,200")
    p.add_argument("--instances-per-point", type=int, default=32)
    p.add_argument("--perms-per-instance", type=int, default=32)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    _add_instance_params(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="compare decoders over many permutations")
    p.add_argument("--instances", nargs="+", required=True, help="instance files or directories of *.evrp")
    p.add_argument("--perms", default="knn:k=2:count=1000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="fp,fr,ss")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out")
    p.add_argument("--report", help="write per-method summary CSV here")
    p.add_argument("--ecdf", help="write gap ECDF points CSV here")
    _add_depot_switch(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("time", help="decode timing table")
    p.add_argument("--instances", nargs="+", required=True)
    p.add_argument("--perms", default="knn:k=2:count=100")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", default="fp,fr,ss")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--include-build", action="store_true", help="time charger-matrix construction too")
    p.add_argument("--exclude-reconstruction", action="store_true", help="stop the clock before solution assembly")
    p.add_argument("--out")
    p.set_defaults(func=cmd_time)

    p = sub.add_parser("validate", help="check a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--perm", help="expected permutation (default: the solution's own customer order)")
    p.add_argument("--perm-index", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.0)
    p.set_defaults(func=cmd_validate)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = harness.read_config(Path(known.config).read_text())
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((tok for tok in argv if tok in sub.choices), None)
    target = sub.choices[command] if command else parser
    dests = {a.dest for a in target._actions} | {a.dest for a in parser._actions}
    unknown = sorted(set(values) - dests)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    for key, value in values.items():
        if key in {a.dest for a in parser._actions}:
            parser.set_defaults(**{key: value})
        else:
            target.set_defaults(**{key: value})


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        logging.getLogger().setLevel(logging.INFO)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # bad permutations, parameter ranges and similar input mistakes
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
