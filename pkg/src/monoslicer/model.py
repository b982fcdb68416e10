"""Shared domain model: events, traces, paths, graphs, decompositions, metrics.

All types here are immutable values after construction and safe to share
between threads. Rational quantities (CBM, FEC, load) are kept exact as
`Fraction`; decimal rendering happens only at report boundaries via
`round_half_up`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_MS = timedelta(milliseconds=1)

MINUTE_MS = 60_000


class NodeKind(str, Enum):
    """What a traced node represents."""

    CLASS_METHOD = "class_method"
    DATA_STORE = "data_store"
    ENTRY_POINT = "entry_point"


@dataclass(frozen=True)
class NodeRef:
    """Two-part identity of a traced node: (container, member).

    Container is a class name, datastore name or page name; member is the
    method, table or handler. Identity is case-sensitive; callers trim
    whitespace before construction.
    """

    kind: NodeKind
    container: str
    member: str

    def __post_init__(self):
        if not self.container:
            raise ValueError("NodeRef.container must be non-empty")
        if not self.member:
            raise ValueError("NodeRef.member must be non-empty")

    @property
    def sort_key(self) -> tuple[str, str, str]:
        return (self.container, self.member, self.kind.value)

    @property
    def label(self) -> str:
        """Display form, e.g. ``A.java.b()`` or ``DB.TABLE A``."""
        return f"{self.container}.{self.member}"

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "container": self.container, "member": self.member}

    @classmethod
    def from_json(cls, data: dict) -> "NodeRef":
        return cls(NodeKind(data["kind"]), data["container"], data["member"])


@dataclass(frozen=True)
class LogEvent:
    """One parsed log row. Timestamps are epoch milliseconds (UTC)."""

    start_time: int
    end_time: int
    session_id: str
    node: NodeRef

    def __post_init__(self):
        if self.start_time > self.end_time:
            raise ValueError("LogEvent start_time must be <= end_time")
        if not self.session_id:
            raise ValueError("LogEvent session_id must be non-empty")

    def to_json(self) -> dict:
        return {
            "start_time": format_timestamp(self.start_time),
            "end_time": format_timestamp(self.end_time),
            "session_id": self.session_id,
            "node": self.node.to_json(),
        }


@dataclass(frozen=True)
class ExecutionTrace:
    """Time-ordered node sequence of one session (or gap-delimited sub-session)."""

    session_id: str
    events: tuple[NodeRef, ...]
    first_start: int
    last_end: int

    def __post_init__(self):
        if not self.events:
            raise ValueError("ExecutionTrace.events must be non-empty")

    @property
    def signature(self) -> "PathSignature":
        return PathSignature(self.events)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "events": [n.to_json() for n in self.events],
            "first_start": format_timestamp(self.first_start),
            "last_end": format_timestamp(self.last_end),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExecutionTrace":
        return cls(
            session_id=data["session_id"],
            events=tuple(NodeRef.from_json(n) for n in data["events"]),
            first_start=parse_timestamp_rfc3339(data["first_start"]),
            last_end=parse_timestamp_rfc3339(data["last_end"]),
        )


@dataclass(frozen=True)
class PathSignature:
    """Element-wise identity of an execution path."""

    sequence: tuple[NodeRef, ...]

    @property
    def sort_key(self) -> tuple:
        return tuple(n.sort_key for n in self.sequence)

    def to_json(self) -> list:
        return [n.to_json() for n in self.sequence]

    @classmethod
    def from_json(cls, data: list) -> "PathSignature":
        return cls(tuple(NodeRef.from_json(n) for n in data))


@dataclass(frozen=True)
class PathRow:
    signature: PathSignature
    frequency: int


@dataclass(frozen=True)
class PathFrequencyTable:
    """Distinct execution paths with session counts.

    Rows are sorted by descending frequency, ties broken by lexicographic
    signature order; signatures are pairwise distinct.
    """

    rows: tuple[PathRow, ...]

    @classmethod
    def from_counts(cls, counts: Mapping[PathSignature, int]) -> "PathFrequencyTable":
        rows = [PathRow(sig, freq) for sig, freq in counts.items() if freq]
        rows.sort(key=lambda r: (-r.frequency, r.signature.sort_key))
        return cls(tuple(rows))

    @property
    def total_frequency(self) -> int:
        return sum(r.frequency for r in self.rows)

    def to_json(self) -> dict:
        return {
            "rows": [
                {"signature": r.signature.to_json(), "frequency": r.frequency} for r in self.rows
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "PathFrequencyTable":
        counts = {}
        for row in data["rows"]:
            sig = PathSignature.from_json(row["signature"])
            counts[sig] = counts.get(sig, 0) + int(row["frequency"])
        return cls.from_counts(counts)


@dataclass(frozen=True)
class CallGraph:
    """Frequency-weighted directly-follows graph over method-level nodes."""

    nodes: frozenset[NodeRef]
    edges: Mapping[tuple[NodeRef, NodeRef], int]

    @classmethod
    def build(
        cls,
        edges: Mapping[tuple[NodeRef, NodeRef], int],
        extra_nodes: Iterable[NodeRef] = (),
    ) -> "CallGraph":
        kept = {}
        nodes = set(extra_nodes)
        for (u, v), w in edges.items():
            if w < 0:
                raise ValueError(f"negative edge weight on {u.label} -> {v.label}")
            if w == 0:
                continue
            kept[(u, v)] = w
            nodes.add(u)
            nodes.add(v)
        return cls(frozenset(nodes), kept)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    def sorted_edges(self) -> list[tuple[NodeRef, NodeRef, int]]:
        return sorted(
            ((u, v, w) for (u, v), w in self.edges.items()),
            key=lambda e: (e[0].sort_key, e[1].sort_key),
        )

    def to_json(self) -> dict:
        return {
            "nodes": [n.to_json() for n in sorted(self.nodes, key=lambda n: n.sort_key)],
            "edges": [
                {"source": u.to_json(), "target": v.to_json(), "weight": w}
                for u, v, w in self.sorted_edges()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CallGraph":
        nodes = [NodeRef.from_json(n) for n in data["nodes"]]
        edges = {}
        for e in data["edges"]:
            key = (NodeRef.from_json(e["source"]), NodeRef.from_json(e["target"]))
            edges[key] = edges.get(key, 0) + int(e["weight"])
        return cls.build(edges, extra_nodes=nodes)


# Kind precedence when a container mixes member kinds (datastore wins,
# then entry point): inference rules make mixes rare, but TABLE-style
# members force the issue.
KIND_RANK = {NodeKind.DATA_STORE: 2, NodeKind.ENTRY_POINT: 1, NodeKind.CLASS_METHOD: 0}


@dataclass(frozen=True)
class ClassGraph:
    """Container-level rollup of a CallGraph; self-loops permitted but flagged."""

    nodes: Mapping[str, NodeKind]
    edges: Mapping[tuple[str, str], int]

    @classmethod
    def build(
        cls,
        edges: Mapping[tuple[str, str], int],
        node_kinds: Mapping[str, NodeKind],
    ) -> "ClassGraph":
        kept = {}
        nodes = dict(node_kinds)
        for (u, v), w in edges.items():
            if w < 0:
                raise ValueError(f"negative edge weight on {u} -> {v}")
            if w == 0:
                continue
            kept[(u, v)] = w
            nodes.setdefault(u, NodeKind.CLASS_METHOD)
            nodes.setdefault(v, NodeKind.CLASS_METHOD)
        return cls(nodes, kept)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    @property
    def self_loops(self) -> list[tuple[str, int]]:
        return sorted((u, w) for (u, v), w in self.edges.items() if u == v)

    def sorted_edges(self) -> list[tuple[str, str, int]]:
        return sorted((u, v, w) for (u, v), w in self.edges.items())

    def to_json(self) -> dict:
        return {
            "nodes": [
                {"container": c, "kind": k.value} for c, k in sorted(self.nodes.items())
            ],
            "edges": [
                {"source": u, "target": v, "weight": w} for u, v, w in self.sorted_edges()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ClassGraph":
        kinds = {n["container"]: NodeKind(n["kind"]) for n in data["nodes"]}
        edges = {}
        for e in data["edges"]:
            key = (e["source"], e["target"])
            edges[key] = edges.get(key, 0) + int(e["weight"])
        return cls.build(edges, kinds)


@dataclass(frozen=True)
class Decomposition:
    """Assignment of containers to named services; duplication allowed."""

    id: str
    label: str
    assignment: Mapping[str, frozenset[str]]

    def __post_init__(self):
        if not self.id:
            raise ValueError("Decomposition.id must be non-empty")
        for service, containers in self.assignment.items():
            if not service:
                raise ValueError("service names must be non-empty")
            if not containers:
                raise ValueError(f"service {service!r} must hold at least one container")

    @classmethod
    def build(cls, id: str, label: str, services: Mapping[str, Iterable[str]]) -> "Decomposition":
        return cls(id, label, {name: frozenset(cs) for name, cs in services.items()})

    @property
    def service_names(self) -> list[str]:
        return sorted(self.assignment)

    def services_of(self, container: str) -> list[str]:
        return sorted(s for s, cs in self.assignment.items() if container in cs)

    def assigned_containers(self) -> set[str]:
        out: set[str] = set()
        for cs in self.assignment.values():
            out.update(cs)
        return out

    def duplicated_containers(self) -> set[str]:
        seen: set[str] = set()
        dup: set[str] = set()
        for cs in self.assignment.values():
            dup.update(seen & cs)
            seen.update(cs)
        return dup

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "services": {name: sorted(cs) for name, cs in sorted(self.assignment.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Decomposition":
        return cls.build(data["id"], data.get("label", data["id"]), data["services"])


@dataclass(frozen=True)
class ValidationResult:
    errors: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_json(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors), "warnings": list(self.warnings)}


def validate_decomposition(d: Decomposition, g: ClassGraph) -> ValidationResult:
    """Check a decomposition against the class graph it should cover.

    Unknown containers and empty services are errors; containers present in
    the graph but assigned nowhere are warnings (they are excluded from
    metrics and reported).
    """
    errors = []
    warnings = []
    known = set(g.nodes)
    for service in sorted(d.assignment):
        containers = d.assignment[service]
        if not containers:
            errors.append(f"empty service {service!r}")
        for c in sorted(containers):
            if c not in known:
                errors.append(f"unknown container {c!r} in service {service!r}")
    unassigned = sorted(known - d.assigned_containers())
    for c in unassigned:
        warnings.append(f"unassigned: {c}")
    return ValidationResult(tuple(errors), tuple(warnings))


@dataclass(frozen=True)
class ServiceMetrics:
    """Per-service measurement row; cbm/fec are None when cla == 0."""

    service: str
    cla: int
    links: int
    cbm: Fraction | None
    dup: int
    external_call_instances: int
    fec: Fraction | None

    @property
    def zero_class(self) -> bool:
        return self.cla == 0

    def to_json(self) -> dict:
        return {
            "service": self.service,
            "cla": self.cla,
            "links": self.links,
            "cbm": None if self.cbm is None else round_half_up(self.cbm),
            "dup": self.dup,
            "external_call_instances": self.external_call_instances,
            "fec": None if self.fec is None else round_half_up(self.fec),
            "zero_class": self.zero_class,
        }


@dataclass(frozen=True)
class SystemMetrics:
    internal_calls: int
    external_calls: int
    external_weight: Fraction
    load: Fraction
    duplicated_classes_total: int

    def to_json(self) -> dict:
        return {
            "internal_calls": self.internal_calls,
            "external_calls": self.external_calls,
            "external_weight": render_number(self.external_weight),
            "load": render_number(self.load),
            "duplicated_classes_total": self.duplicated_classes_total,
        }


@dataclass(frozen=True)
class BreakSuggestion:
    source: str
    target: str
    weight: int
    rationale: str

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "weight": self.weight,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class CycleReport:
    """Strongly connected groups, enumerated simple cycles and break advice.

    Self-loops are listed both as length-1 cycles and under ``self_loops``;
    they are excluded from break suggestions (a container calling itself
    never crosses a service boundary).
    """

    sccs: tuple[tuple[str, ...], ...]
    self_loops: tuple[tuple[str, int], ...]
    cycles: tuple[tuple[str, ...], ...]
    truncated: bool
    suggested_breaks: tuple[BreakSuggestion, ...]

    def to_json(self) -> dict:
        return {
            "sccs": [list(s) for s in self.sccs],
            "self_loops": [{"container": c, "weight": w} for c, w in self.self_loops],
            "cycles": [list(c) for c in self.cycles],
            "truncated": self.truncated,
            "suggested_breaks": [b.to_json() for b in self.suggested_breaks],
        }


def round_half_up(value: Fraction, places: int = 2) -> str:
    """Render a non-negative rational with fixed decimals, round half up.

    Exact for every rational input: 7/27 -> "0.26", 1/200 -> "0.01".
    """
    if value < 0:
        raise ValueError("round_half_up expects non-negative values")
    scale = 10**places
    units = int(value * scale + Fraction(1, 2))
    whole, frac = divmod(units, scale)
    return f"{whole}.{frac:0{places}d}"


def render_number(value: Fraction) -> int | str:
    """Integral rationals render as JSON integers, others as 2-decimal strings."""
    if value.denominator == 1:
        return int(value)
    return round_half_up(value)


def format_timestamp(ms: int) -> str:
    """Epoch milliseconds -> RFC3339 UTC with exactly 3 fractional digits."""
    whole, frac = divmod(ms, 1000)
    stamp = datetime.fromtimestamp(whole, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")
    return f"{stamp}.{frac:03d}Z"


def parse_timestamp_rfc3339(text: str) -> int:
    """RFC3339 timestamp -> epoch milliseconds; naive times are taken as UTC."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return (dt - _EPOCH) // _MS


def canonical_json(data) -> str:
    """Byte-deterministic JSON used for every serialized artifact."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
