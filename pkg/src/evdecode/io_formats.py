"""Instance files, result tables and solution files.

Instance grammar (EVRP benchmark style, keys case-insensitive)::

    NAME: <text>
    DIMENSION: <customers + 1>
    STATIONS: <m>
    CAPACITY: <Q>
    ENERGY_CAPACITY: <B>
    ENERGY_CONSUMPTION: <h>
    NODE_COORD_SECTION
    <id> <x> <y>            DIMENSION lines, plus one per station listed by bare id
    DEMAND_SECTION
    <id> <demand>           DIMENSION lines (the depot's demand is ignored)
    STATIONS_COORD_SECTION
    <id> [<x> <y>]          STATIONS lines; bare ids refer to NODE_COORD_SECTION
    DEPOT_SECTION
    <id>
    -1
    EOF

Node ids are arbitrary distinct integers.  Customers are the non-depot
ids listed in DEMAND_SECTION, ordered by id; stations keep their listed
order.  Other header keys (``VEHICLES``, ``OPTIMAL_VALUE``, ``COMMENT``,
...) are kept in ``extras`` and otherwise ignored.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

from .model import Instance, Node, Solution

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

REQUIRED_KEYS = ("DIMENSION", "STATIONS", "CAPACITY", "ENERGY_CAPACITY", "ENERGY_CONSUMPTION")
IGNORED_KEYS = ("VEHICLES", "OPTIMAL_VALUE", "COMMENT", "TYPE", "EDGE_WEIGHT_TYPE", "EDGE_WEIGHT_FORMAT")
KNOWN_KEYS = {"NAME", *REQUIRED_KEYS, *IGNORED_KEYS}
SECTIONS = ("NODE_COORD_SECTION", "DEMAND_SECTION", "STATIONS_COORD_SECTION", "DEPOT_SECTION")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, section: str | None = None):
        self.line = line
        self.section = section
        where = []
        if section:
            where.append(section)
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{' '.join(where)}: {message}" if where else message)


def _number(tok: str, lineno: int, section: str | None, kind=float):
    try:
        value = kind(tok)
    except ValueError:
        raise ParseError(f"malformed number {tok!r}", lineno, section) from None
    if kind is float and math.isnan(value):
        raise ParseError(f"malformed number {tok!r}", lineno, section)
    return value


@dataclass
class ParsedInstance:
    instance: Instance
    extras: dict[str, str]


def parse_instance_full(text: str) -> ParsedInstance:
    header: dict[str, str] = {}
    extras: dict[str, str] = {}
    rows: dict[str, list[tuple[int, list[str]]]] = {s: [] for s in SECTIONS}
    seen_sections: set[str] = set()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        if upper in rows:
            if upper in seen_sections:
                raise ParseError("section repeated", lineno, upper)
            section = upper
            seen_sections.add(upper)
            continue
        if ":" in line and section is None:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            value = value.strip()
            if key in header or key in extras:
                raise ParseError(f"duplicate key {key}", lineno)
            if key in KNOWN_KEYS and key not in IGNORED_KEYS:
                header[key] = value
            else:
                if key not in KNOWN_KEYS:
                    log.warning("ignoring unknown header key %s", key)
                extras[key] = value
            continue
        if section is None:
            raise ParseError(f"unexpected line {line!r}", lineno)
        rows[section].append((lineno, line.split()))

    for key in REQUIRED_KEYS:
        if key not in header:
            raise ParseError(f"missing key {key}")
    for sec in SECTIONS:
        if sec not in seen_sections:
            raise ParseError("missing section", section=sec)

    dim = _number(header["DIMENSION"], None, None, int)
    m = _number(header["STATIONS"], None, None, int)
    Q = _number(header["CAPACITY"], None, None)
    B = _number(header["ENERGY_CAPACITY"], None, None)
    h = _number(header["ENERGY_CONSUMPTION"], None, None)
    if dim < 1 or m < 0:
        raise ParseError("DIMENSION must be >= 1 and STATIONS >= 0")

    coords: dict[int, tuple[float, float]] = {}
    sec = "NODE_COORD_SECTION"
    for lineno, toks in rows[sec]:
        if len(toks) != 3:
            raise ParseError("expected '<id> <x> <y>'", lineno, sec)
        nid = _number(toks[0], lineno, sec, int)
        if nid in coords:
            raise ParseError(f"duplicate id {nid}", lineno, sec)
        coords[nid] = (_number(toks[1], lineno, sec), _number(toks[2], lineno, sec))

    sec = "STATIONS_COORD_SECTION"
    stations = []
    station_ids = set()
    bare = 0
    for lineno, toks in rows[sec]:
        nid = _number(toks[0], lineno, sec, int)
        if nid in station_ids:
            raise ParseError(f"duplicate id {nid}", lineno, sec)
        station_ids.add(nid)
        if len(toks) == 3:
            stations.append((_number(toks[1], lineno, sec), _number(toks[2], lineno, sec)))
        elif len(toks) == 1:
            if nid not in coords:
                raise ParseError(f"station {nid} has no coordinates", lineno, sec)
            stations.append(coords[nid])
            bare += 1
        else:
            raise ParseError("expected '<id>' or '<id> <x> <y>'", lineno, sec)
    if len(stations) != m:
        raise ParseError(f"{len(stations)} stations, expected STATIONS={m}", section=sec)
    expected = dim + bare
    if len(coords) != expected:
        raise ParseError(
            f"{len(coords)} coordinates, expected DIMENSION={dim} plus {bare} station(s) listed by id",
            section="NODE_COORD_SECTION",
        )

    demands: dict[int, float] = {}
    sec = "DEMAND_SECTION"
    for lineno, toks in rows[sec]:
        if len(toks) != 2:
            raise ParseError("expected '<id> <demand>'", lineno, sec)
        nid = _number(toks[0], lineno, sec, int)
        if nid in demands:
            raise ParseError(f"duplicate id {nid}", lineno, sec)
        if nid not in coords:
            raise ParseError(f"id {nid} has no coordinates", lineno, sec)
        demands[nid] = _number(toks[1], lineno, sec)
    if len(demands) != dim:
        raise ParseError(f"{len(demands)} demands, expected DIMENSION={dim}", section=sec)

    sec = "DEPOT_SECTION"
    depot_ids = []
    for lineno, toks in rows[sec]:
        for tok in toks:
            nid = _number(tok, lineno, sec, int)
            if nid == -1:
                break
            depot_ids.append((lineno, nid))
    if len(depot_ids) != 1:
        raise ParseError(f"expected exactly one depot, got {len(depot_ids)}", section=sec)
    lineno, depot_id = depot_ids[0]
    if depot_id not in demands:
        raise ParseError(f"depot {depot_id} is not among the DEMAND_SECTION ids", lineno, sec)

    customer_ids = sorted(nid for nid in demands if nid != depot_id)
    name = header.get("NAME", "instance")
    if name.endswith(".evrp"):
        name = name[: -len(".evrp")]
    try:
        instance = Instance(
            depot=coords[depot_id],
            customers=[coords[c] for c in customer_ids],
            demands=[demands[c] for c in customer_ids],
            stations=stations,
            cargo_capacity=Q,
            battery_capacity=B,
            consumption_rate=h,
            name=name,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return ParsedInstance(instance, extras)


def parse_instance(text: str) -> Instance:
    return parse_instance_full(text).instance


def format_instance(instance: Instance, extras: dict[str, str] | None = None) -> str:
    """Write the benchmark layout: depot id 1, customers 2..n+1, stations after."""
    n, m = instance.n, instance.m
    lines = [f"NAME: {instance.name}"]
    for key, value in (extras or {}).items():
        lines.append(f"{key}: {value}")
    lines += [
        f"DIMENSION: {n + 1}",
        f"STATIONS: {m}",
        f"CAPACITY: {instance.cargo_capacity!r}",
        f"ENERGY_CAPACITY: {instance.battery_capacity!r}",
        f"ENERGY_CONSUMPTION: {instance.consumption_rate!r}",
        "EDGE_WEIGHT_TYPE: EUC_2D",
        "NODE_COORD_SECTION",
    ]
    points = [instance.depot, *instance.customers, *instance.stations]
    lines += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(points)]
    lines.append("DEMAND_SECTION")
    lines.append("1 0")
    lines += [f"{i + 2} {q!r}" for i, q in enumerate(instance.demands)]
    lines.append("STATIONS_COORD_SECTION")
    lines += [str(n + 2 + j) for j in range(m)]
    lines += ["DEPOT_SECTION", "1", "-1", "EOF", ""]
    return "\n".join(lines)


# -- results ----------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    instance: str
    method: str
    perm_id: int
    outcome: str  # solved | infeasible
    distance: float | None
    gap_pct: float | None
    decode_time: float
    max_front: int

    def sort_key(self):
        return (self.instance, self.method, self.perm_id)


RESULT_FIELDS = ["schema", *[f.name for f in fields(ResultRow)]]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_results(rows: Iterable[ResultRow], fmt: str = "csv") -> bytes:
    """Serialise rows sorted by (instance, method, permutation id)."""
    ordered = sorted(rows, key=ResultRow.sort_key)
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_FIELDS)
        for row in ordered:
            writer.writerow([SCHEMA_VERSION, *(_fmt(v) for v in asdict(row).values())])
    elif fmt == "jsonl":
        for row in ordered:
            obj = {"schema": SCHEMA_VERSION}
            for key, value in asdict(row).items():
                obj[key] = float(_fmt(value)) if isinstance(value, float) else value
            buf.write(json.dumps(obj) + "\n")
    else:
        raise ValueError(f"unknown result format {fmt!r}")
    return buf.getvalue().encode()


def _opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def read_results(data: bytes, fmt: str = "csv") -> list[ResultRow]:
    text = data.decode()
    rows = []
    if fmt == "csv":
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(
                ResultRow(
                    instance=rec["instance"],
                    method=rec["method"],
                    perm_id=int(rec["perm_id"]),
                    outcome=rec["outcome"],
                    distance=_opt_float(rec["distance"]),
                    gap_pct=_opt_float(rec["gap_pct"]),
                    decode_time=float(rec["decode_time"]),
                    max_front=int(rec["max_front"]),
                )
            )
    elif fmt == "jsonl":
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                obj.pop("schema", None)
                rows.append(ResultRow(**obj))
    else:
        raise ValueError(f"unknown result format {fmt!r}")
    return rows


# -- solutions --------------------------------------------------------------


def format_solution(solution: Solution) -> str:
    return "\n".join([*solution.tokens(), f"distance={solution.total_distance!r}", ""])


def parse_solution(text: str) -> Solution:
    nodes = []
    distance = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("distance="):
            distance = _number(line.partition("=")[2], lineno, None)
            continue
        try:
            nodes.append(Node.parse(line))
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if distance is None:
        raise ParseError("missing 'distance=' line")
    return Solution(tuple(nodes), distance)


def format_permutation(perm: Sequence[int]) -> str:
    return " ".join(str(c) for c in perm)
