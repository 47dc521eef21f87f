"""Optimal capacity split of a giant tour into depot-delimited routes.

Battery is ignored here; charging is added afterwards by the fixed-route
decoders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import Instance, check_permutation


@dataclass(frozen=True)
class RoutePlan:
    routes: tuple[tuple[int, ...], ...]
    total_distance: float

    @property
    def customers(self) -> list[int]:
        return [c for route in self.routes for c in route]


def plan_distance(instance: Instance, routes: Sequence[Sequence[int]]) -> float:
    """Depot-to-depot length of the routes, summed leg by leg in order."""
    D = instance.dist
    total = 0.0
    for route in routes:
        prev = 0
        for c in route:
            total += float(D[prev, 1 + c])
            prev = 1 + c
        total += float(D[prev, 0])
    return total


def split(instance: Instance, permutation: Sequence[int]) -> RoutePlan | None:
    """Cut ``permutation`` into capacity-feasible consecutive routes of
    minimum total distance (unlimited fleet).  ``None`` when some single
    demand exceeds the capacity.

    Shortest path over cut positions: ``cost[j]`` is the best way to serve
    the first ``j`` customers.  Among equal costs the smallest predecessor
    wins.
    """
    perm = check_permutation(instance, permutation)
    n = len(perm)
    D = instance.dist
    dem = instance.demands
    Q = instance.cargo_capacity
    if any(dem[c] > Q for c in perm):
        return None
    cost = [math.inf] * (n + 1)
    pred = [-1] * (n + 1)
    cost[0] = 0.0
    for i in range(n):
        if cost[i] == math.inf:
            continue
        load = 0.0
        inner = 0.0
        first = 1 + perm[i]
        for j in range(i, n):
            node = 1 + perm[j]
            load += dem[perm[j]]
            if load > Q:
                break
            if j > i:
                inner += D[1 + perm[j - 1], node]
            value = cost[i] + D[0, first] + inner + D[node, 0]
            if value < cost[j + 1]:
                cost[j + 1] = value
                pred[j + 1] = i
    routes = []
    j = n
    while j > 0:
        i = pred[j]
        routes.append(tuple(perm[i:j]))
        j = i
    routes.reverse()
    return RoutePlan(tuple(routes), plan_distance(instance, routes))
