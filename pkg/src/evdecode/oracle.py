"""Exponential-time reference decoders for tiny instances (tests only).

Between two consecutive walk nodes the oracle tries the direct hop and
every sequence of chargers that is simple on each side of the depot,
simulating cargo and battery hop by hop.  Visiting the depot in a gap ends
the current route.  Without a depot visit any repeated charger closes a
loop that can be cut at no cost.  With one, a station may legitimately
appear on both sides (``S1 S2 D S2``): cutting that loop would drop the
cargo reset.  A second depot visit in the same gap never helps.  This is
the only pruning.

``brute_fpscp`` memoises on the exact state (position, cargo, battery),
which is lossless; ``brute_fpscp_enumerate`` walks the full cartesian
product of gap choices and serves as its independent twin.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .fp_fla import DecodeResult, DecodeStats
from .model import Instance, Solution, check_permutation
from .split import RoutePlan


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_customers: int = 7
    max_stations: int = 3
    max_expansions: int = 5_000_000

    def __post_init__(self):
        if min(self.max_customers, self.max_stations, self.max_expansions) <= 0:
            raise ValueError("budget caps must be positive")

    def check(self, instance: Instance) -> None:
        if instance.n > self.max_customers or instance.m > self.max_stations:
            raise BudgetExceeded(
                f"oracle limited to {self.max_customers} customers / {self.max_stations} stations, "
                f"got {instance.n} / {instance.m}"
            )


@dataclass(frozen=True)
class _Detour:
    nodes: tuple[int, ...]
    inner: float  # length between first and last charger
    has_depot: bool


def _simple(nodes: Sequence[int], limit: int):
    for length in range(limit + 1):
        yield from itertools.permutations(nodes, length)


def _detours(
    instance: Instance, chargers: Sequence[int], max_stops: int | None, depot_splits: bool = False
) -> list[_Detour]:
    """Candidate gap sequences.

    With ``depot_splits`` the depot closes a route, and the station
    sequences before and after it are enumerated independently.
    """
    D, h, B = instance.dist, instance.consumption_rate, instance.battery_capacity
    limit = len(chargers) if max_stops is None else min(max_stops, len(chargers))
    if depot_splits:
        stations = [c for c in chargers if c != 0]
        halves = list(_simple(stations, len(stations)))
        seqs = [seq for seq in halves if seq] + [pre + (0,) + post for pre in halves for post in halves]
    else:
        seqs = [seq for seq in _simple(chargers, limit) if seq]
    out = []
    for seq in seqs:
        inner = 0.0
        ok = True
        for u, v in zip(seq, seq[1:]):
            if not h * D[u, v] <= B:
                ok = False
                break
            inner += D[u, v]
        if ok:
            out.append(_Detour(seq, inner, 0 in seq))
    return out


def _moves(instance: Instance, detours, prev: int, cur: int, q: float, b: float, cargo: bool):
    """Feasible (cost, q', b', inserted nodes) options for one gap."""
    D, h, B, Q = instance.dist, instance.consumption_rate, instance.battery_capacity, instance.cargo_capacity
    dq = instance.node_demand[cur] if cargo else 0.0
    leg = D[prev, cur]
    if b + h * leg <= B and q + dq <= Q:
        yield leg, q + dq, b + h * leg, ()
    for det in detours:
        first, last = det.nodes[0], det.nodes[-1]
        if not b + h * D[prev, first] <= B or not h * D[last, cur] <= B:
            continue
        nq = dq if (cargo and det.has_depot) else q + dq
        if nq > Q:
            continue
        yield D[prev, first] + det.inner + D[last, cur], nq, h * D[last, cur], det.nodes


def _result(instance: Instance, walk, best, choices, method, start, expansions) -> DecodeResult:
    stats = DecodeStats(generated=expansions)
    if best is None:
        stats.wall_time = time.perf_counter() - start
        return DecodeResult(None, stats, method)
    ids = [walk[0]]
    for i, inserted in enumerate(choices):
        ids.extend(inserted)
        ids.append(walk[i + 1])
    seq = [ids[0]]
    for v in ids[1:]:
        if v != seq[-1]:
            seq.append(v)
    stats.wall_time = time.perf_counter() - start
    return DecodeResult(Solution(tuple(instance.node(v) for v in seq), float(best)), stats, method)


def _search(instance: Instance, walk: Sequence[int], detours, budget: OracleBudget, cargo: bool, reset_at_depot: bool):
    counter = [0]
    last = len(walk) - 1

    @lru_cache(maxsize=None)
    def best(i: int, q: float, b: float):
        """Cheapest completion from walk position ``i``; (cost, choices) or None."""
        if i == last:
            return 0.0, ()
        counter[0] += 1
        if counter[0] > budget.max_expansions:
            raise BudgetExceeded("node-expansion cap reached")
        found = None
        for cost, nq, nb, nodes in _moves(instance, detours, walk[i], walk[i + 1], q, b, cargo):
            if reset_at_depot and walk[i + 1] == 0:
                nb = 0.0
            tail = best(i + 1, nq, nb)
            if tail is None:
                continue
            total = cost + tail[0]
            if found is None or total < found[0]:
                found = (total, (nodes, *tail[1]))
        return found

    found = best(0, 0.0, 0.0)
    return found, counter[0]


def brute_fpscp(instance: Instance, permutation: Sequence[int], budget: OracleBudget = OracleBudget()) -> DecodeResult:
    """True optimum of the joint split-and-charge problem, by exhaustive search."""
    start = time.perf_counter()
    budget.check(instance)
    perm = check_permutation(instance, permutation)
    walk = [0, *(1 + c for c in perm), 0]
    detours = _detours(instance, instance.charger_ids, None, depot_splits=True)
    found, expansions = _search(instance, walk, detours, budget, cargo=True, reset_at_depot=False)
    best, choices = found if found is not None else (None, ())
    return _result(instance, walk, best, choices, "oracle-fpscp", start, expansions)


def brute_fpscp_enumerate(
    instance: Instance, permutation: Sequence[int], budget: OracleBudget = OracleBudget()
) -> DecodeResult:
    """Same optimum by walking every combination of gap choices (no memo)."""
    start = time.perf_counter()
    budget.check(instance)
    perm = check_permutation(instance, permutation)
    walk = [0, *(1 + c for c in perm), 0]
    detours = _detours(instance, instance.charger_ids, None, depot_splits=True)
    best = [None, ()]
    count = [0]

    def rec(i, q, b, dist, chosen):
        if i == len(walk) - 1:
            if best[0] is None or dist < best[0]:
                best[0], best[1] = dist, tuple(chosen)
            return
        for cost, nq, nb, nodes in _moves(instance, detours, walk[i], walk[i + 1], q, b, True):
            count[0] += 1
            if count[0] > budget.max_expansions:
                raise BudgetExceeded("node-expansion cap reached")
            chosen.append(nodes)
            rec(i + 1, nq, nb, dist + cost, chosen)
            chosen.pop()

    rec(0, 0.0, 0.0, 0.0, [])
    return _result(instance, walk, best[0], best[1], "oracle-enumerate", start, count[0])


def brute_frvcp(
    instance: Instance,
    plan: RoutePlan | None,
    budget: OracleBudget = OracleBudget(),
    *,
    max_stops: int | None = None,
    allow_depot_as_station: bool = True,
) -> DecodeResult:
    """Optimal charging of fixed routes by exhaustive search.

    Route boundaries are fixed; the depot may still serve as a plain charger
    inside a gap when ``allow_depot_as_station`` is set.  ``max_stops=1``
    gives the single-station restriction.
    """
    start = time.perf_counter()
    budget.check(instance)
    if plan is None:
        return DecodeResult(None, DecodeStats(), "oracle-frvcp")
    walk = [0]
    for route in plan.routes:
        walk.extend(1 + c for c in route)
        walk.append(0)
    chargers = instance.charger_ids if allow_depot_as_station else instance.charger_ids[1:]
    detours = _detours(instance, chargers, max_stops)
    found, expansions = _search(instance, walk, detours, budget, cargo=False, reset_at_depot=True)
    best, choices = found if found is not None else (None, ())
    return _result(instance, walk, best, choices, "oracle-frvcp", start, expansions)


def brute_split(instance: Instance, permutation: Sequence[int]) -> RoutePlan | None:
    """Best capacity split by trying all 2**(n-1) cut patterns."""
    from .split import plan_distance

    perm = check_permutation(instance, permutation)
    n = len(perm)
    best = None
    for mask in range(1 << max(n - 1, 0)):
        routes, cur = [], [perm[0]] if n else []
        for i in range(1, n):
            if mask >> (i - 1) & 1:
                routes.append(tuple(cur))
                cur = []
            cur.append(perm[i])
        if cur:
            routes.append(tuple(cur))
        if any(sum(instance.demands[c] for c in r) > instance.cargo_capacity for r in routes):
            continue
        total = plan_distance(instance, routes)
        if best is None or total < best.total_distance:
            best = RoutePlan(tuple(routes), total)
    return best


def is_close(a: float, b: float, rel: float = 1e-9) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)
