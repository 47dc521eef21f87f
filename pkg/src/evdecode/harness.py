"""Experiment drivers: front-size sweeps, decoder comparison and timing.

All randomness is derived from one master seed, and every table is
emitted in a fixed order, so a rerun with the same inputs reproduces the
same bytes regardless of ``threads``.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import charging_graph, fixed_route, fp_fla
from .io_formats import ResultRow
from .model import Instance, validate
from .permgen import PermGenConfig, derive_seed
from .split import split

log = logging.getLogger(__name__)

METHODS = ("fp", "fr", "ss")
ZERO_GAP_REL = 1e-9
SWEEP_PARAMS = ("customer_count", "station_count", "battery_capacity", "cargo_capacity")


def default_threads() -> int:
    env = os.environ.get("EVDECODE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class InstanceParams:
    customer_count: int = 100
    station_count: int = 10
    battery_capacity: float = 2.0
    cargo_capacity: float = 200.0
    max_demand: float = 10.0
    consumption_rate: float = 1.0

    def __post_init__(self):
        if self.customer_count < 1 or self.station_count < 0:
            raise ValueError("need at least one customer and a non-negative station count")
        if min(self.battery_capacity, self.cargo_capacity, self.max_demand, self.consumption_rate) <= 0:
            raise ValueError("capacities, demand and consumption must be positive")


def generate_instance(params: InstanceParams, seed: int, name: str | None = None) -> Instance:
    """Uniform points in the unit square, demands uniform on (0, max_demand]."""
    rng = np.random.default_rng(seed)
    depot = rng.random(2)
    customers = rng.random((params.customer_count, 2))
    stations = rng.random((params.station_count, 2))
    demands = params.max_demand * (1.0 - rng.random(params.customer_count))
    return Instance(
        depot=tuple(depot),
        customers=[tuple(p) for p in customers],
        demands=demands.tolist(),
        stations=[tuple(p) for p in stations],
        cargo_capacity=params.cargo_capacity,
        battery_capacity=params.battery_capacity,
        consumption_rate=params.consumption_rate,
        name=name or f"rand-n{params.customer_count}-m{params.station_count}-s{seed}",
    )


def _pmap(fn: Callable, tasks: Sequence, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def quartiles(values: Sequence[float]) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return float(q1), float(med), float(q3)


# -- front-size sweeps ----------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str = "customer_count"
    grid: tuple = (25, 50, 100, 200)
    instances_per_point: int = 32
    permutations_per_instance: int = 32
    base: InstanceParams = InstanceParams()
    seed: int = 0
    k: int = 2

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMS:
            raise ValueError(f"parameter must be one of {SWEEP_PARAMS}")
        if not self.grid or any(not v > 0 and not (self.parameter == "station_count" and v == 0) for v in self.grid):
            raise ValueError("grid must be nonempty and positive")
        if self.instances_per_point < 1 or self.permutations_per_instance < 1:
            raise ValueError("counts must be positive")

    def params_at(self, value) -> InstanceParams:
        if self.parameter in ("customer_count", "station_count"):
            value = int(value)
        else:
            value = float(value)
        return replace(self.base, **{self.parameter: value})


@dataclass
class SweepPoint:
    value: float
    runs: int
    infeasible: int
    failures: int
    mean: float
    q1: float
    q3: float
    min: int
    max: int
    max_fronts: list[int] = field(default_factory=list, repr=False)
    invalid: int = 0  # solutions failing validation; only counted when checking


@dataclass
class SweepReport:
    spec: SweepSpec
    points: list[SweepPoint]

    def to_csv(self) -> bytes:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["schema", "parameter", "value", "runs", "infeasible", "failures", "mean", "q1", "q3", "min", "max"])
        for p in self.points:
            writer.writerow(
                [1, self.spec.parameter, format(p.value, ".12g"), p.runs, p.infeasible, p.failures,
                 format(p.mean, ".12g"), format(p.q1, ".12g"), format(p.q3, ".12g"), p.min, p.max]
            )
        return buf.getvalue().encode()


def _sweep_task(task) -> tuple[list[int], int, int, int]:
    spec, point_index, inst_index, check = task
    value = spec.grid[point_index]
    inst_seed = derive_seed(derive_seed(spec.seed, point_index), inst_index)
    instance = generate_instance(spec.params_at(value), inst_seed)
    F = charging_graph.build(instance)
    ctx = fp_fla.make_context(instance, F)
    perms = PermGenConfig("knn", spec.k, spec.permutations_per_instance, inst_seed)
    fronts, infeasible, failures, invalid = [], 0, 0, 0
    for p in range(spec.permutations_per_instance):
        perm = perms.one(instance, p)
        try:
            result = fp_fla.decode(instance, F, perm, context=ctx)
        except Exception:  # noqa: BLE001 - a failed run is recorded, not fatal
            log.exception("sweep run failed (point %s, instance %s, perm %s)", value, inst_index, p)
            failures += 1
            continue
        fronts.append(result.stats.max_front)
        infeasible += not result.feasible
        if check and result.feasible:
            invalid += bool(validate(instance, perm, result.solution))
    return fronts, infeasible, failures, invalid


def run_front_size_sweep(spec: SweepSpec, *, threads: int = 1, check: bool = False) -> SweepReport:
    """Per grid point: mean, quartiles and range of the per-decode maximum
    front size over instances x kNN permutations.

    ``check`` also validates every decoded solution (``SweepPoint.invalid``);
    the CSV is the same either way.
    """
    tasks = [(spec, gi, ii, check) for gi in range(len(spec.grid)) for ii in range(spec.instances_per_point)]
    results = _pmap(_sweep_task, tasks, threads)
    points = []
    for gi, value in enumerate(spec.grid):
        chunk = results[gi * spec.instances_per_point : (gi + 1) * spec.instances_per_point]
        fronts = [f for r in chunk for f in r[0]]
        infeasible = sum(r[1] for r in chunk)
        failures = sum(r[2] for r in chunk)
        invalid = sum(r[3] for r in chunk)
        if fronts:
            q1, _, q3 = quartiles(fronts)
            point = SweepPoint(float(value), len(fronts), infeasible, failures, float(np.mean(fronts)), q1, q3,
                               int(min(fronts)), int(max(fronts)), fronts, invalid)
        else:
            point = SweepPoint(float(value), 0, infeasible, failures, math.nan, math.nan, math.nan, 0, 0, [], invalid)
        points.append(point)
    return SweepReport(spec, points)


# -- method comparison ----------------------------------------------------


@dataclass
class MethodStats:
    instance: str
    method: str
    feasible: int  # permutations the exact decoder solved
    solved: int  # of those, solved by this method
    gaps: list[float] = field(repr=False)

    @property
    def solved_pct(self) -> float:
        return 100.0 * self.solved / self.feasible if self.feasible else math.nan

    @property
    def zero_gap_pct(self) -> float:
        if not self.gaps:
            return math.nan
        return 100.0 * sum(g / 100.0 <= ZERO_GAP_REL for g in self.gaps) / len(self.gaps)

    def percentile(self, p: float) -> float:
        return float(np.percentile(self.gaps, p)) if self.gaps else math.nan

    @property
    def p90(self) -> float:
        return self.percentile(90)

    @property
    def p95(self) -> float:
        return self.percentile(95)

    def ecdf(self) -> list[tuple[float, float]]:
        """(gap %, fraction of solved permutations with gap <= it) pairs."""
        gaps = sorted(self.gaps)
        n = len(gaps)
        points = []
        for i, g in enumerate(gaps):
            if i + 1 < n and gaps[i + 1] == g:
                continue
            points.append((g, (i + 1) / n))
        return points


@dataclass
class GapReport:
    stats: list[MethodStats]

    def get(self, instance: str, method: str) -> MethodStats:
        for s in self.stats:
            if s.instance == instance and s.method == method:
                return s
        raise KeyError((instance, method))

    def to_csv(self) -> bytes:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["schema", "instance", "method", "feasible", "solved", "solved_pct", "zero_gap_pct", "p90", "p95"])
        for s in self.stats:
            writer.writerow([1, s.instance, s.method, s.feasible, s.solved, *(format(v, ".12g") for v in
                             (s.solved_pct, s.zero_gap_pct, s.p90, s.p95))])
        return buf.getvalue().encode()

    def ecdf_csv(self) -> bytes:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["schema", "instance", "method", "gap_pct", "cumulative_fraction"])
        for s in self.stats:
            for g, frac in s.ecdf():
                writer.writerow([1, s.instance, s.method, format(g, ".12g"), format(frac, ".12g")])
        return buf.getvalue().encode()


@dataclass
class Comparison:
    rows: list[ResultRow]
    report: GapReport
    violations: list[str]


def decode_all(instance: Instance, perms: Sequence[Sequence[int]], methods: Sequence[str], allow_depot_as_station=True):
    """Yield (perm_id, {method: DecodeResult}) for each permutation."""
    F = charging_graph.build(instance)
    fp_ctx = fp_fla.make_context(instance, F)
    fr_ctx = fixed_route.make_context(instance, F) if "fr" in methods else None
    ss_ctx = (
        fixed_route.make_context(instance, F, single_station=True, allow_depot_as_station=allow_depot_as_station)
        if "ss" in methods
        else None
    )
    for pid, perm in enumerate(perms):
        out = {}
        for method in methods:
            start = time.perf_counter()
            if method == "fp":
                res = fp_fla.decode(instance, F, perm, context=fp_ctx)
            elif method == "fr":
                res = fixed_route.fr_fla_decode(instance, F, split(instance, perm), context=fr_ctx)
            elif method == "ss":
                res = fixed_route.ss_fr_fla_decode(instance, split(instance, perm), F, context=ss_ctx)
            else:
                raise ValueError(f"unknown method {method!r}")
            res.stats.wall_time = time.perf_counter() - start
            out[method] = res
        yield pid, out


def _compare_task(task):
    instance, cfg, methods, allow_depot = task
    perms = cfg.generate(instance)
    rows = []
    for pid, results in decode_all(instance, perms, methods, allow_depot):
        ref = results.get("fp")
        for method, res in results.items():
            gap = None
            if ref is not None and ref.feasible and res.feasible:
                gap = 100.0 * (res.distance - ref.distance) / ref.distance
            rows.append(
                ResultRow(
                    instance=instance.name,
                    method=method,
                    perm_id=pid,
                    outcome=res.outcome,
                    distance=res.distance if res.feasible else None,
                    gap_pct=gap,
                    decode_time=res.stats.wall_time,
                    max_front=res.stats.max_front,
                )
            )
    return rows


def check_hierarchy(rows: Iterable[ResultRow], rel_tol: float = ZERO_GAP_REL) -> list[str]:
    """Ordering fp <= fr <= ss on co-solved permutations and nested solve sets."""
    table: dict[tuple[str, int], dict[str, ResultRow]] = {}
    for row in rows:
        table.setdefault((row.instance, row.perm_id), {})[row.method] = row
    order = [m for m in METHODS]
    problems = []
    for (inst, pid), by_method in sorted(table.items()):
        present = [m for m in order if m in by_method]
        for lo, hi in zip(present, present[1:]):
            a, b = by_method[lo], by_method[hi]
            if b.outcome == "solved" and a.outcome != "solved":
                problems.append(f"{inst}#{pid}: {hi} solved but {lo} did not")
            if a.outcome == "solved" and b.outcome == "solved" and a.distance > b.distance * (1 + rel_tol):
                problems.append(f"{inst}#{pid}: {lo} distance {a.distance!r} > {hi} distance {b.distance!r}")
    return problems


def summarize(rows: Sequence[ResultRow], methods: Sequence[str]) -> GapReport:
    by_inst: dict[str, dict[tuple[str, int], ResultRow]] = {}
    for row in rows:
        by_inst.setdefault(row.instance, {})[(row.method, row.perm_id)] = row
    stats = []
    for inst in sorted(by_inst):
        table = by_inst[inst]
        feasible_ids = sorted(pid for (m, pid), r in table.items() if m == "fp" and r.outcome == "solved")
        for method in methods:
            gaps, solved = [], 0
            for pid in feasible_ids:
                row = table.get((method, pid))
                if row is not None and row.outcome == "solved":
                    solved += 1
                    gaps.append(row.gap_pct)
            stats.append(MethodStats(inst, method, len(feasible_ids), solved, gaps))
    return GapReport(stats)


def run_comparison(
    instances: Sequence[Instance],
    config: PermGenConfig,
    methods: Sequence[str] = METHODS,
    *,
    threads: int = 1,
    allow_depot_as_station: bool = True,
) -> Comparison:
    """Decode every permutation with every method; gaps are relative to the
    exact decoder and only over permutations it solved."""
    methods = list(methods)
    if "fp" not in methods:
        methods.insert(0, "fp")
    methods.sort(key=METHODS.index)
    tasks = [(inst, config, tuple(methods), allow_depot_as_station) for inst in instances]
    rows = [row for chunk in _pmap(_compare_task, tasks, threads) for row in chunk]
    rows.sort(key=ResultRow.sort_key)
    return Comparison(rows, summarize(rows, methods), check_hierarchy(rows))


# -- timing -----------------------------------------------------------------


@dataclass
class TimingRow:
    instance: str
    method: str
    samples: int
    median: float
    q1: float
    q3: float


def run_timing(
    instances: Sequence[Instance],
    config: PermGenConfig,
    methods: Sequence[str] = METHODS,
    repetitions: int = 1,
    *,
    include_build: bool = False,
    include_reconstruction: bool = True,
) -> list[TimingRow]:
    """Median and quartiles of per-permutation decode time.

    By default the charger matrix is built once per instance outside the
    timed region and solution reconstruction is inside it.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    table = []
    for instance in instances:
        perms = config.generate(instance)
        F = charging_graph.build(instance)
        for method in methods:
            samples = []
            for perm in perms:
                for _ in range(repetitions):
                    start = time.perf_counter()
                    G = charging_graph.build(instance) if include_build else F
                    if method == "fp":
                        res = fp_fla.decode(instance, G, perm)
                    elif method == "fr":
                        res = fixed_route.fr_fla_decode(instance, G, split(instance, perm))
                    elif method == "ss":
                        res = fixed_route.ss_fr_fla_decode(instance, split(instance, perm), G)
                    else:
                        raise ValueError(f"unknown method {method!r}")
                    elapsed = time.perf_counter() - start
                    if not include_reconstruction:
                        elapsed -= res.stats.wall_time - res.stats.label_time
                    samples.append(elapsed)
            q1, med, q3 = quartiles(samples)
            table.append(TimingRow(instance.name, method, len(samples), med, q1, q3))
    return table


def timing_csv(rows: Sequence[TimingRow], *, include_build: bool = False, include_reconstruction: bool = True) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["schema", "instance", "method", "samples", "median_s", "q1_s", "q3_s",
                     "includes_build", "includes_reconstruction"])
    for r in rows:
        writer.writerow([1, r.instance, r.method, r.samples, format(r.median, ".12g"), format(r.q1, ".12g"),
                         format(r.q3, ".12g"), int(include_build), int(include_reconstruction)])
    return buf.getvalue().encode()


# -- config files -----------------------------------------------------------


def read_config(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys are case-insensitive
    and may use ``-`` or ``_``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out
