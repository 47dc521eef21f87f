"""Charging insertion on fixed routes (split first, charge second).

``fr_fla_decode`` allows any chain of chargers between two consecutive
nodes; ``ss_fr_fla_decode`` allows at most one.  Labels track distance and
battery only, and the battery resets on arrival at the depot.
"""
from __future__ import annotations

import time

from . import _backend
from .charging_graph import ChargingMatrix
from .fp_fla import DecodeResult, DecodeStats, assemble
from .model import Instance
from .split import RoutePlan


def flatten(plan: RoutePlan) -> list[int]:
    """Global node ids: depot, route 1, depot, route 2, ..., depot."""
    ids = [0]
    for route in plan.routes:
        ids.extend(1 + c for c in route)
        ids.append(0)
    return ids


def make_context(
    instance: Instance,
    F: ChargingMatrix,
    *,
    single_station: bool = False,
    allow_depot_as_station: bool = True,
    eps: float = 0.0,
    backend: str | None = None,
):
    kernels = _backend.get(backend)
    stops = None
    if single_station:
        stops = list(range(F.size)) if allow_depot_as_station else list(range(1, F.size))
    return kernels.FRContext(
        instance.dist,
        list(F.node_ids),
        F.dist,
        instance.battery_capacity + eps,
        instance.consumption_rate,
        stops,
    )


def _decode(instance, F, plan, ctx, method) -> DecodeResult:
    start = time.perf_counter()
    stats = DecodeStats()
    if plan is None:
        stats.wall_time = stats.label_time = time.perf_counter() - start
        return DecodeResult(None, stats, method)
    walk = flatten(plan)
    fd, fb = [0.0], [0.0]
    steps = []
    for i in range(1, len(walk)):
        fd, fb, par, kind, fin, fout, generated = ctx.step(fd, fb, walk[i - 1], walk[i], walk[i] == 0)
        size = len(fd)
        stats.generated += generated
        stats.pruned += generated - size
        stats.front_sizes.append(size)
        stats.max_front = max(stats.max_front, size)
        steps.append((par, kind, fin, fout))
        if size == 0:
            stats.wall_time = stats.label_time = time.perf_counter() - start
            return DecodeResult(None, stats, method)
    stats.label_time = time.perf_counter() - start
    solution = assemble(instance, F, walk, steps, 0, float(fd[0]))
    stats.wall_time = time.perf_counter() - start
    return DecodeResult(solution, stats, method)


def fr_fla_decode(
    instance: Instance,
    F: ChargingMatrix,
    plan: RoutePlan | None,
    *,
    eps: float = 0.0,
    backend: str | None = None,
    context=None,
) -> DecodeResult:
    """Optimal charging of fixed routes with arbitrary charger chains.

    A ``None`` plan (split failed) is reported as infeasible.
    """
    ctx = context if context is not None else make_context(instance, F, eps=eps, backend=backend)
    return _decode(instance, F, plan, ctx, "fr")


def ss_fr_fla_decode(
    instance: Instance,
    plan: RoutePlan | None,
    F: ChargingMatrix | None = None,
    *,
    allow_depot_as_station: bool = True,
    eps: float = 0.0,
    backend: str | None = None,
    context=None,
) -> DecodeResult:
    """Optimal charging of fixed routes with at most one stop per gap.

    The stop may be the depot when ``allow_depot_as_station`` is set.  The
    charger matrix is only used for its node ordering and is built on demand.
    """
    if F is None:
        from .charging_graph import build

        F = build(instance, eps=eps)
    ctx = context if context is not None else make_context(
        instance, F, single_station=True, allow_depot_as_station=allow_depot_as_station, eps=eps, backend=backend
    )
    return _decode(instance, F, plan, ctx, "ss")
