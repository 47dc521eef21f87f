"""Exact joint split-and-charge decoding of a fixed customer permutation.

The permutation is walked as ``depot, c_1, ..., c_n, depot``.  Each step
extends every label of the previous Pareto front by a direct move, by a
charging detour ``f_in -> ... -> f_out`` (the middle is a precomputed
shortest path between chargers) or by a detour through the depot, which
also empties the cargo counter.  Dominated labels are dropped after each
step, and the cheapest label at the final depot is the optimum.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

from . import _backend
from .charging_graph import ChargingMatrix, reconstruct_path
from .model import DEPOT, Extension, Instance, Label, Solution, check_permutation, prune

INF = math.inf


@dataclass
class DecodeStats:
    max_front: int = 0
    generated: int = 0
    pruned: int = 0
    wall_time: float = 0.0
    label_time: float = 0.0  # wall time minus solution reconstruction
    front_sizes: list[int] = field(default_factory=list, repr=False)


@dataclass
class DecodeResult:
    solution: Solution | None
    stats: DecodeStats
    method: str = "fp"

    @property
    def feasible(self) -> bool:
        return self.solution is not None

    @property
    def distance(self) -> float:
        return self.solution.total_distance if self.solution is not None else INF

    @property
    def outcome(self) -> str:
        return "solved" if self.feasible else "infeasible"


def _expand_detour(instance: Instance, F: ChargingMatrix, kind: int, f_in: int, f_out: int) -> list[int]:
    """Global node ids visited strictly between two customers."""
    if kind == Extension.DIRECT:
        return []
    if kind == Extension.SINGLE:
        return [F.node_ids[f_in]]
    if kind == Extension.CHARGE:
        hops = reconstruct_path(F, f_in, f_out)
    else:
        hops = reconstruct_path(F, f_in, 0) + reconstruct_path(F, 0, f_out)[1:]
    return [F.node_ids[h] for h in hops]


def assemble(instance: Instance, F: ChargingMatrix, walk: Sequence[int], steps, final: int, distance: float) -> Solution:
    """Backtrack parent links through per-step fronts into a node sequence.

    ``steps[i]`` holds ``(parent, kind, f_in, f_out)`` arrays for the front
    at walk position ``i + 1``.  Consecutive repeats of a node (zero-length
    hops such as a depot detour taken from the depot) are collapsed.
    """
    gaps = []
    idx = final
    for i in range(len(steps) - 1, -1, -1):
        parent, kind, fin, fout = steps[i]
        gaps.append(_expand_detour(instance, F, int(kind[idx]), int(fin[idx]), int(fout[idx])))
        idx = int(parent[idx])
    gaps.reverse()
    ids = [walk[0]]
    for i, gap in enumerate(gaps):
        ids.extend(gap)
        ids.append(walk[i + 1])
    seq = [ids[0]]
    for v in ids[1:]:
        if v != seq[-1]:
            seq.append(v)
    return Solution(tuple(instance.node(v) for v in seq), float(distance))


def walk_ids(instance: Instance, permutation: Sequence[int]) -> list[int]:
    return [0, *(1 + c for c in permutation), 0]


def decode(
    instance: Instance,
    F: ChargingMatrix,
    permutation: Sequence[int],
    *,
    eps: float = 0.0,
    backend: str | None = None,
    context=None,
) -> DecodeResult:
    """Minimum-distance feasible decoding of ``permutation``, or infeasible.

    ``context`` may carry a prebuilt kernel context (see :func:`make_context`)
    so that batches skip the per-instance setup.
    """
    start = time.perf_counter()
    perm = check_permutation(instance, permutation)
    ctx = context if context is not None else make_context(instance, F, eps=eps, backend=backend)
    walk = walk_ids(instance, perm)
    stats = DecodeStats()
    fd, fq, fb = [0.0], [0.0], [0.0]
    steps = []
    for i in range(1, len(walk)):
        fd, fq, fb, par, kind, fin, fout, generated = ctx.step(fd, fq, fb, walk[i - 1], walk[i])
        size = len(fd)
        stats.generated += generated
        stats.pruned += generated - size
        stats.front_sizes.append(size)
        stats.max_front = max(stats.max_front, size)
        steps.append((par, kind, fin, fout))
        if size == 0:
            stats.wall_time = stats.label_time = time.perf_counter() - start
            return DecodeResult(None, stats, "fp")
    stats.label_time = time.perf_counter() - start
    # fronts are sorted by distance, so the first label is the cheapest
    solution = assemble(instance, F, walk, steps, 0, float(fd[0]))
    stats.wall_time = time.perf_counter() - start
    return DecodeResult(solution, stats, "fp")


def make_context(instance: Instance, F: ChargingMatrix, *, eps: float = 0.0, backend: str | None = None):
    kernels = _backend.get(backend)
    return kernels.FPContext(
        instance.dist,
        instance.node_demand,
        list(F.node_ids),
        F.dist,
        instance.cargo_capacity + eps,
        instance.battery_capacity + eps,
        instance.consumption_rate,
    )


def decode_batch(
    instance: Instance,
    F: ChargingMatrix,
    permutations: Sequence[Sequence[int]],
    *,
    eps: float = 0.0,
    backend: str | None = None,
) -> list[DecodeResult]:
    if not permutations:
        return []
    ctx = make_context(instance, F, eps=eps, backend=backend)
    return [decode(instance, F, p, eps=eps, context=ctx) for p in permutations]


def decode_reference(
    instance: Instance,
    F: ChargingMatrix,
    permutation: Sequence[int],
    *,
    prune_fronts: bool = True,
    skip_redundant_charge: bool = False,
) -> DecodeResult:
    """Literal transcription of the labeling loop, all (f_in, f_out) pairs.

    Slow; exists to check the kernels.  ``prune_fronts=False`` keeps every
    feasible label.  ``skip_redundant_charge`` drops charge detours that
    touch the depot whenever the matching depot detour is feasible.
    """
    start = time.perf_counter()
    perm = check_permutation(instance, permutation)
    walk = walk_ids(instance, perm)
    D, dem = instance.dist, instance.node_demand
    Q, B, h = instance.cargo_capacity, instance.battery_capacity, instance.consumption_rate
    K = F.size
    ch = F.node_ids
    Fd = F.dist
    front = [Label(0.0, 0.0, 0.0)]
    history: list[list[Label]] = []
    stats = DecodeStats()
    for i in range(1, len(walk)):
        prev, cur = walk[i - 1], walk[i]
        cand = []
        for j, lab in enumerate(front):
            leg = D[prev, cur]
            direct = Label(lab.d + leg, lab.q + dem[cur], lab.b + h * leg, j, Extension.DIRECT)
            if direct.q <= Q and direct.b <= B:
                cand.append(direct)
            for a in range(K):
                x = D[prev, ch[a]]
                if not lab.b + h * x <= B:
                    continue
                for o in range(K):
                    y = D[ch[o], cur]
                    if not h * y <= B:
                        continue
                    dep_ok = Fd[a, 0] < INF and Fd[0, o] < INF and dem[cur] <= Q
                    if dep_ok:
                        depot = Label(lab.d + x + Fd[a, 0] + Fd[0, o] + y, dem[cur], h * y, j, Extension.DEPOT, a, o)
                    if Fd[a, o] < INF and lab.q + dem[cur] <= Q:
                        if not (skip_redundant_charge and dep_ok and (a == 0 or o == 0)):
                            cand.append(Label(lab.d + x + Fd[a, o] + y, lab.q + dem[cur], h * y, j, Extension.CHARGE, a, o))
                    if dep_ok:
                        cand.append(depot)
        stats.generated += len(cand)
        front = prune(cand) if prune_fronts else sorted(cand, key=lambda lab: lab.key)
        stats.pruned += len(cand) - len(front)
        stats.front_sizes.append(len(front))
        stats.max_front = max(stats.max_front, len(front))
        history.append(front)
        if not front:
            stats.wall_time = time.perf_counter() - start
            return DecodeResult(None, stats, "fp-reference")
    steps = [
        ([lab.parent for lab in fr], [lab.extension for lab in fr], [lab.f_in for lab in fr], [lab.f_out for lab in fr])
        for fr in history
    ]
    best = min(range(len(front)), key=lambda k: front[k].d)
    solution = assemble(instance, F, walk, steps, best, front[best].d)
    stats.wall_time = time.perf_counter() - start
    return DecodeResult(solution, stats, "fp-reference")
