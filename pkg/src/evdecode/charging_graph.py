"""All-pairs shortest paths between chargers (depot and stations).

An edge joins two chargers when a fully charged vehicle can drive between
them, ``h * d(u, v) <= B``.  Row/column 0 is the depot, ``1..m`` are the
stations in instance order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Instance

INF = math.inf


@dataclass(frozen=True)
class ChargingMatrix:
    dist: np.ndarray  # (m+1, m+1), +inf where unreachable
    succ: np.ndarray  # next hop on one shortest path, -1 where unreachable
    node_ids: tuple[int, ...]  # global instance node id of each row

    @property
    def size(self) -> int:
        return self.dist.shape[0]


def build(instance: Instance, *, eps: float = 0.0) -> ChargingMatrix:
    """Floyd-Warshall over the charger graph, O((m+1)^3).

    Only strictly improving relaxations replace a path, so among equal-length
    shortest paths the one found first (lowest intermediate index) is kept.
    """
    ids = instance.charger_ids
    k = len(ids)
    hop = instance.dist[np.ix_(ids, ids)]
    edge = instance.consumption_rate * hop <= instance.battery_capacity + eps
    dist = np.where(edge, hop, INF)
    np.fill_diagonal(dist, 0.0)
    succ = np.where(np.isfinite(dist), np.arange(k)[None, :], -1)
    for via in range(k):
        through = dist[:, via, None] + dist[None, via, :]
        better = through < dist
        if better.any():
            dist = np.where(better, through, dist)
            succ = np.where(better, succ[:, via, None], succ)
    dist.flags.writeable = False
    succ.flags.writeable = False
    return ChargingMatrix(dist=dist, succ=succ.astype(np.intp), node_ids=tuple(ids))


def reconstruct_path(F: ChargingMatrix, i: int, j: int) -> list[int]:
    """Charger indices of the stored shortest path from ``i`` to ``j``."""
    if not math.isfinite(F.dist[i, j]):
        raise ValueError(f"no battery-feasible path between chargers {i} and {j}")
    path = [i]
    while i != j:
        i = int(F.succ[i, j])
        path.append(i)
    return path
