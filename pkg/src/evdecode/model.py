"""Domain types, Pareto dominance and the independent feasibility validator.

Node numbering used by every decoder: global id 0 is the depot, ids
``1..n`` are customers ``0..n-1`` and ids ``n+1..n+m`` are stations
``0..m-1``.  Distances are plain Euclidean doubles computed with
:func:`math.hypot`; nothing is rounded.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Point = tuple[float, float]


class NodeKind(enum.Enum):
    DEPOT = "D"
    CUSTOMER = "C"
    STATION = "S"


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    index: int = 0

    @property
    def token(self) -> str:
        if self.kind is NodeKind.DEPOT:
            return "D"
        return f"{self.kind.value}{self.index}"

    @classmethod
    def parse(cls, token: str) -> "Node":
        token = token.strip()
        if token == "D":
            return DEPOT
        if len(token) < 2 or token[0] not in "CS" or not token[1:].isdigit():
            raise ValueError(f"bad node token {token!r}")
        kind = NodeKind.CUSTOMER if token[0] == "C" else NodeKind.STATION
        return cls(kind, int(token[1:]))

    def __repr__(self) -> str:
        return self.token


DEPOT = Node(NodeKind.DEPOT, 0)


def customer(i: int) -> Node:
    return Node(NodeKind.CUSTOMER, i)


def station(j: int) -> Node:
    return Node(NodeKind.STATION, j)


def euclidean(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Instance:
    """A single-depot EVRP instance on the plane.

    ``customers`` holds ``(x, y)`` points, ``demands`` the matching demands.
    """

    depot: Point
    customers: tuple[Point, ...]
    demands: tuple[float, ...]
    stations: tuple[Point, ...]
    cargo_capacity: float
    battery_capacity: float
    consumption_rate: float
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "depot", (float(self.depot[0]), float(self.depot[1])))
        object.__setattr__(self, "customers", tuple((float(x), float(y)) for x, y in self.customers))
        object.__setattr__(self, "demands", tuple(float(q) for q in self.demands))
        object.__setattr__(self, "stations", tuple((float(x), float(y)) for x, y in self.stations))
        if len(self.demands) != len(self.customers):
            raise ValueError("one demand per customer required")
        if any(not q >= 0 for q in self.demands):
            raise ValueError("demands must be non-negative")
        for attr in ("cargo_capacity", "battery_capacity", "consumption_rate"):
            value = float(getattr(self, attr))
            if not value > 0:
                raise ValueError(f"{attr} must be strictly positive")
            if attr == "consumption_rate" and math.isinf(value):
                raise ValueError("consumption_rate must be finite")
            object.__setattr__(self, attr, value)

    @property
    def n(self) -> int:
        return len(self.customers)

    @property
    def m(self) -> int:
        return len(self.stations)

    @property
    def num_nodes(self) -> int:
        return 1 + self.n + self.m

    def node_id(self, node: Node) -> int:
        if node.kind is NodeKind.DEPOT:
            return 0
        if node.kind is NodeKind.CUSTOMER:
            if not 0 <= node.index < self.n:
                raise IndexError(f"no customer {node.index}")
            return 1 + node.index
        if not 0 <= node.index < self.m:
            raise IndexError(f"no station {node.index}")
        return 1 + self.n + node.index

    def node(self, node_id: int) -> Node:
        if node_id == 0:
            return DEPOT
        if node_id <= self.n:
            return customer(node_id - 1)
        return station(node_id - 1 - self.n)

    def point(self, node: Node) -> Point:
        if node.kind is NodeKind.DEPOT:
            return self.depot
        if node.kind is NodeKind.CUSTOMER:
            return self.customers[node.index]
        return self.stations[node.index]

    def demand(self, node: Node) -> float:
        return self.demands[node.index] if node.kind is NodeKind.CUSTOMER else 0.0

    def distance(self, a: Node, b: Node) -> float:
        return euclidean(self.point(a), self.point(b))

    @cached_property
    def points(self) -> list[Point]:
        return [self.depot, *self.customers, *self.stations]

    @cached_property
    def dist(self) -> np.ndarray:
        """Full distance matrix over global node ids (read-only)."""
        pts = self.points
        hyp = math.hypot
        mat = np.array(
            [[hyp(ax - bx, ay - by) for bx, by in pts] for ax, ay in pts],
            dtype=np.float64,
        ).reshape(len(pts), len(pts))
        mat.flags.writeable = False
        return mat

    @cached_property
    def node_demand(self) -> np.ndarray:
        arr = np.zeros(self.num_nodes, dtype=np.float64)
        arr[1 : 1 + self.n] = self.demands
        arr.flags.writeable = False
        return arr

    @property
    def charger_ids(self) -> list[int]:
        """Global ids of the charging graph vertices: depot first, then stations."""
        return [0, *range(1 + self.n, 1 + self.n + self.m)]


def check_permutation(instance: Instance, permutation: Sequence[int]) -> tuple[int, ...]:
    perm = tuple(int(c) for c in permutation)
    if sorted(perm) != list(range(instance.n)):
        raise ValueError("permutation must contain every customer index exactly once")
    return perm


# -- labels and dominance -------------------------------------------------


class Extension(enum.IntEnum):
    DIRECT = 0
    CHARGE = 1
    DEPOT = 2
    SINGLE = 3


@dataclass(frozen=True)
class Label:
    d: float
    q: float
    b: float
    parent: int = -1
    extension: Extension = Extension.DIRECT
    f_in: int = -1
    f_out: int = -1

    @property
    def key(self) -> tuple[float, float, float]:
        return (self.d, self.q, self.b)


def dominates(a: Label, b: Label) -> bool:
    """True iff ``a`` is no worse than ``b`` in (d, q, b) and strictly better in one."""
    if a.d <= b.d and a.q <= b.q and a.b <= b.b:
        return a.d < b.d or a.q < b.q or a.b < b.b
    return False


def prune(candidates: Iterable[Label]) -> list[Label]:
    """Non-dominated subset, exact duplicates collapsed to the earliest one.

    Sorts by (d, q, b) and sweeps a staircase of kept (q, b) points, so the
    cost is O(m log m) lookups.  The result is in sorted order.
    """
    labels = list(candidates)
    order = sorted(range(len(labels)), key=lambda i: labels[i].key)
    kept: list[Label] = []
    stair_q: list[float] = []
    stair_b: list[float] = []
    last = None
    for i in order:
        lab = labels[i]
        if lab.key == last:
            continue
        pos = bisect.bisect_right(stair_q, lab.q)
        if pos and stair_b[pos - 1] <= lab.b:
            continue
        last = lab.key
        kept.append(lab)
        end = pos
        while end < len(stair_q) and stair_b[end] >= lab.b:
            end += 1
        stair_q[pos:end] = [lab.q]
        stair_b[pos:end] = [lab.b]
    return kept


def prune_pairwise(candidates: Iterable[Label]) -> list[Label]:
    """Quadratic reference filter, used to check :func:`prune`."""
    labels = list(candidates)
    out = []
    seen = set()
    for i, lab in enumerate(labels):
        if lab.key in seen:
            continue
        if any(dominates(other, lab) for j, other in enumerate(labels) if j != i):
            continue
        seen.add(lab.key)
        out.append(lab)
    return out


# -- solutions ------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    sequence: tuple[Node, ...]
    total_distance: float

    @property
    def routes(self) -> list[tuple[Node, ...]]:
        """Depot-delimited routes, each starting and ending at the depot."""
        routes = []
        start = 0
        for t in range(1, len(self.sequence)):
            if self.sequence[t].kind is NodeKind.DEPOT:
                routes.append(self.sequence[start : t + 1])
                start = t
        return routes

    @property
    def customers(self) -> list[int]:
        return [v.index for v in self.sequence if v.kind is NodeKind.CUSTOMER]

    @property
    def stations_visited(self) -> int:
        return sum(1 for v in self.sequence if v.kind is NodeKind.STATION)

    def tokens(self) -> list[str]:
        return [v.token for v in self.sequence]


def sequence_distance(instance: Instance, sequence: Sequence[Node]) -> float:
    total = 0.0
    for u, v in zip(sequence, sequence[1:]):
        total += instance.distance(u, v)
    return total


@dataclass(frozen=True)
class TracePoint:
    node: Node
    cargo: float
    battery: float


def trace(instance: Instance, sequence: Sequence[Node]) -> list[TracePoint]:
    """Cargo served on the current route and battery drawn since the last
    charger, both evaluated on arrival at each node."""
    points = []
    cargo = battery = 0.0
    prev = None
    for v in sequence:
        if prev is not None:
            leg = instance.consumption_rate * instance.distance(prev, v)
            battery = leg if prev.kind is not NodeKind.CUSTOMER else battery + leg
            if prev.kind is NodeKind.DEPOT:
                cargo = 0.0
            cargo += instance.demand(v)
        points.append(TracePoint(v, cargo, battery))
        prev = v
    return points


@dataclass(frozen=True)
class Violation:
    kind: str  # endpoints | unknown-node | order | capacity | battery | distance
    position: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}@{self.position}: {self.detail}"


def validate(
    instance: Instance,
    permutation: Sequence[int],
    solution: Solution,
    *,
    eps: float = 0.0,
    rel_tol: float = 1e-9,
) -> list[Violation]:
    """Check a solution from scratch.  An empty list means feasible."""
    seq = solution.sequence
    out: list[Violation] = []
    if len(seq) < 2 or seq[0] != DEPOT or seq[-1] != DEPOT:
        out.append(Violation("endpoints", 0, "sequence must start and end at the depot"))
        if len(seq) < 2:
            return out
    unknown = []
    for t, v in enumerate(seq):
        try:
            instance.node_id(v)
        except IndexError as exc:
            unknown.append(Violation("unknown-node", t, str(exc)))
    if unknown:
        return out + unknown

    served = solution.customers
    if served != list(permutation):
        out.append(Violation("order", 0, f"customer order {served} != {list(permutation)}"))

    Q = instance.cargo_capacity + eps
    B = instance.battery_capacity + eps
    for t, point in enumerate(trace(instance, seq)):
        if point.battery > B:
            out.append(Violation("battery", t, f"drew {point.battery!r} > {instance.battery_capacity!r}"))
        if point.node.kind is NodeKind.DEPOT and t > 0 and point.cargo > Q:
            out.append(Violation("capacity", t, f"route load {point.cargo!r} > {instance.cargo_capacity!r}"))

    recomputed = sequence_distance(instance, seq)
    if not math.isclose(recomputed, solution.total_distance, rel_tol=rel_tol, abs_tol=1e-12):
        out.append(
            Violation("distance", len(seq) - 1, f"reported {solution.total_distance!r}, recomputed {recomputed!r}")
        )
    return out
