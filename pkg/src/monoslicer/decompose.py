"""Decomposition candidates: loading, auto-generation and edge classification."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .model import (
    ClassGraph,
    Decomposition,
    PathFrequencyTable,
    validate_decomposition,
)


class Provenance(str, Enum):
    USER_SPECIFIED = "user_specified"
    BASE_CLUSTERING = "base_clustering"
    DUPLICATE_VARIANT = "duplicate_variant"
    MERGE_VARIANT = "merge_variant"
    EXTERNAL_VARIANT = "external_variant"


@dataclass(frozen=True)
class Candidate:
    decomposition: Decomposition
    provenance: Provenance

    def to_json(self) -> dict:
        data = self.decomposition.to_json()
        data["provenance"] = self.provenance.value
        return data


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[Candidate, ...]

    def __post_init__(self):
        ids = [c.decomposition.id for c in self.candidates]
        if len(ids) != len(set(ids)):
            raise ValueError("candidate ids must be unique")

    def find(self, candidate_id: str) -> Candidate | None:
        for c in self.candidates:
            if c.decomposition.id == candidate_id:
                return c
        return None

    def to_json(self) -> dict:
        return {"candidates": [c.to_json() for c in self.candidates]}

    @classmethod
    def from_json(cls, data: dict) -> "CandidateSet":
        out = []
        for item in data["candidates"]:
            out.append(
                Candidate(
                    Decomposition.from_json(item),
                    Provenance(item.get("provenance", "user_specified")),
                )
            )
        return cls(tuple(out))


@dataclass(frozen=True)
class EdgeClassification:
    source: str
    target: str
    weight: int
    verdict: str  # "internal" | "external"
    attributed_service: str
    target_service: str | None = None

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "weight": self.weight,
            "verdict": self.verdict,
            "attributed_service": self.attributed_service,
            "target_service": self.target_service,
        }


@dataclass(frozen=True)
class UnassignedEdge:
    source: str
    target: str
    weight: int
    missing: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "weight": self.weight,
            "missing": list(self.missing),
        }


@dataclass(frozen=True)
class ClassificationResult:
    classifications: tuple[EdgeClassification, ...]
    unassigned_edges: tuple[UnassignedEdge, ...]
    unassigned_containers: tuple[str, ...]

    @property
    def internal_weight(self) -> int:
        return sum(c.weight for c in self.classifications if c.verdict == "internal")

    @property
    def external_weight(self) -> int:
        return sum(c.weight for c in self.classifications if c.verdict == "external")


def classify_edges(g: ClassGraph, d: Decomposition) -> ClassificationResult:
    """Split class-graph edges into internal/external under a decomposition.

    An edge is internal iff at least one service holds both endpoints (the
    local copy is preferred under duplication); attribution always picks the
    lexicographically smallest eligible service. Edges touching an
    unassigned container are excluded from classification and reported.
    """
    services_of: dict[str, list[str]] = {}
    for service, containers in d.assignment.items():
        for c in containers:
            services_of.setdefault(c, []).append(service)
    for c in services_of:
        services_of[c].sort()

    unassigned = tuple(sorted(c for c in g.nodes if c not in services_of))
    classifications: list[EdgeClassification] = []
    missing_edges: list[UnassignedEdge] = []
    for u, v, w in g.sorted_edges():
        missing = tuple(c for c in dict.fromkeys((u, v)) if c not in services_of)
        if missing:
            missing_edges.append(UnassignedEdge(u, v, w, missing))
            continue
        common = set(services_of[u]) & set(services_of[v])
        if common:
            classifications.append(EdgeClassification(u, v, w, "internal", min(common)))
        else:
            classifications.append(
                EdgeClassification(
                    u, v, w, "external", services_of[u][0], services_of[v][0]
                )
            )
    return ClassificationResult(tuple(classifications), tuple(missing_edges), unassigned)


class DecompositionFormatError(Exception):
    """Raised for malformed decomposition documents."""


def _reject_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise DecompositionFormatError(f"duplicate service name {key!r}")
        seen.add(key)
    return dict(pairs)


def load_decompositions(data: bytes | str) -> list[Decomposition]:
    """Parse a JSON array of {id, label, services: {name: [containers]}}."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise DecompositionFormatError(
            f"malformed document at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, list):
        raise DecompositionFormatError("document must be a JSON array of decompositions")
    out: list[Decomposition] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(doc):
        if not isinstance(item, dict) or "id" not in item or "services" not in item:
            raise DecompositionFormatError(f"entry {i}: expected object with id and services")
        if item["id"] in seen_ids:
            raise DecompositionFormatError(f"duplicate decomposition id {item['id']!r}")
        seen_ids.add(item["id"])
        services = item["services"]
        if not isinstance(services, dict) or not services:
            raise DecompositionFormatError(f"entry {item['id']!r}: services must be a non-empty object")
        for name, containers in services.items():
            if not isinstance(containers, list) or not containers:
                raise DecompositionFormatError(
                    f"entry {item['id']!r}: service {name!r} must list at least one container"
                )
        try:
            out.append(Decomposition.build(item["id"], item.get("label", item["id"]), services))
        except ValueError as exc:
            raise DecompositionFormatError(f"entry {item['id']!r}: {exc}") from exc
    return out


def _path_container_sets(table: PathFrequencyTable) -> list[frozenset[str]]:
    return [frozenset(n.container for n in row.signature.sequence) for row in table.rows]


def _connected_row_groups(rows: list[frozenset[str]], indices: list[int]) -> list[list[int]]:
    """Group path rows that transitively share containers; groups keep row order."""
    parent = {i: i for i in indices}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    owner: dict[str, int] = {}
    for i in indices:
        for c in rows[i]:
            if c in owner:
                union(owner[c], i)
            else:
                owner[c] = i
    groups: dict[int, list[int]] = {}
    for i in indices:
        groups.setdefault(find(i), []).append(i)
    return [groups[root] for root in sorted(groups)]


def _container_traffic(g: ClassGraph) -> dict[str, int]:
    traffic: dict[str, int] = {c: 0 for c in g.nodes}
    for (u, v), w in g.edges.items():
        traffic[u] = traffic.get(u, 0) + w
        if v != u:
            traffic[v] = traffic.get(v, 0) + w
    return traffic


def generate_candidates(
    g: ClassGraph,
    table: PathFrequencyTable,
    max_candidates: int = 20,
    max_shared_expansion: int = 5,
    user: Iterable[Decomposition] = (),
) -> CandidateSet:
    """Propose decompositions from path structure.

    Base clustering groups path rows that transitively share containers and
    makes one service per group. Every container whose removal splits its
    group into several disconnected parts ("shared" container, e.g. a class
    used by otherwise unrelated paths) then yields three variants, highest
    incident traffic first:

    - duplicate: the group splits at the container, which joins every part,
    - merge: the parts stay unified (explicit merge counterpart),
    - external: the parts split and the container stays only where it
      carries the most call instances (ties to the lexicographically
      smallest part), leaving cross-part calls external.

    Containers never seen in any path (graph nodes only) are attached to no
    service by clustering; they are reported by validation downstream.
    """
    if not g.nodes:
        raise ValueError("cannot generate candidates for an empty graph")

    rows = _path_container_sets(table)
    indices = [i for i, r in enumerate(rows) if r]
    groups = _connected_row_groups(rows, indices)

    def containers_of(group: list[int], drop: str | None = None) -> frozenset[str]:
        out: set[str] = set()
        for i in group:
            out.update(rows[i])
        if drop is not None:
            out.discard(drop)
        return frozenset(out)

    # Orphan graph nodes (never on a mined path) get a catch-all service so
    # base candidates validate cleanly even on partially covered graphs.
    on_paths: set[str] = set()
    for r in rows:
        on_paths.update(r)
    orphans = sorted(set(g.nodes) - on_paths)

    def build(parts: list[frozenset[str]], id: str, label: str, provenance: Provenance) -> Candidate:
        assignment: dict[str, Iterable[str]] = {}
        for i, part in enumerate(parts, start=1):
            assignment[f"MS{i}"] = part
        if orphans:
            assignment[f"MS{len(parts) + 1}"] = frozenset(orphans)
        return Candidate(Decomposition.build(id, label, assignment), provenance)

    base_parts = [containers_of(group) for group in groups]
    candidates: list[Candidate] = [Candidate(d, Provenance.USER_SPECIFIED) for d in user]
    if base_parts or orphans:
        candidates.append(build(base_parts, "base", "base clustering", Provenance.BASE_CLUSTERING))

    # Shared containers: removal disconnects the container's group.
    shared: list[tuple[int, str, int, list[list[int]]]] = []
    traffic = _container_traffic(g)
    for gi, group in enumerate(groups):
        if len(group) < 2:
            continue
        for c in sorted(containers_of(group)):
            stripped = [row - {c} for row in rows]
            keep = [i for i in group if stripped[i]]
            if len(keep) < 2:
                continue
            sub_groups = _connected_row_groups(stripped, keep)
            if len(sub_groups) >= 2:
                shared.append((gi, c, traffic.get(c, 0), sub_groups))
    shared.sort(key=lambda s: (-s[2], s[1]))
    shared = shared[:max_shared_expansion]

    for gi, c, _, sub_groups in shared:
        prefix = [containers_of(groups[k]) for k in range(gi)]
        suffix = [containers_of(groups[k]) for k in range(gi + 1, len(groups))]
        touched = [containers_of(sub, drop=c) for sub in sub_groups]

        dup_parts = prefix + [part | {c} for part in touched] + suffix
        candidates.append(
            build(dup_parts, f"dup-{c}", f"duplicate {c} across split services", Provenance.DUPLICATE_VARIANT)
        )

        merge_parts = prefix + [containers_of(groups[gi])] + suffix
        candidates.append(
            build(merge_parts, f"merge-{c}", f"keep services around {c} merged", Provenance.MERGE_VARIANT)
        )

        def part_traffic(part: frozenset[str]) -> int:
            total = 0
            for (u, v), w in g.edges.items():
                if (u == c and v in part) or (v == c and u in part):
                    total += w
            return total

        ranked = sorted(
            range(len(touched)), key=lambda i: (-part_traffic(touched[i]), sorted(touched[i]))
        )
        winner = ranked[0]
        ext_parts = prefix + [
            part | {c} if i == winner else part for i, part in enumerate(touched)
        ] + suffix
        candidates.append(
            build(ext_parts, f"ext-{c}", f"keep {c} in one service, calls external", Provenance.EXTERNAL_VARIANT)
        )

    candidates = candidates[:max_candidates]
    for cand in candidates:
        result = validate_decomposition(cand.decomposition, g)
        if not result.ok:
            raise ValueError(
                f"generated candidate {cand.decomposition.id!r} is invalid: {result.errors}"
            )
    return CandidateSet(tuple(candidates))


def enumerate_partitions(containers: Iterable[str], limit: int = 12) -> Iterator[Decomposition]:
    """Exhaustive duplication-free decompositions; test oracle for small graphs.

    Yields every set partition of the containers (Bell-number many), so the
    container count is capped.
    """
    items = sorted(containers)
    if len(items) > limit:
        raise ValueError(f"exhaustive enumeration capped at {limit} containers")
    if not items:
        return

    def rec(i: int, parts: list[list[str]]) -> Iterator[list[list[str]]]:
        if i == len(items):
            yield [list(p) for p in parts]
            return
        for p in parts:
            p.append(items[i])
            yield from rec(i + 1, parts)
            p.pop()
        parts.append([items[i]])
        yield from rec(i + 1, parts)
        parts.pop()

    for n, parts in enumerate(rec(0, [])):
        services = {f"MS{k + 1}": part for k, part in enumerate(parts)}
        yield Decomposition.build(f"part-{n}", f"partition {n}", services)


__all__ = [
    "Candidate",
    "CandidateSet",
    "ClassificationResult",
    "DecompositionFormatError",
    "EdgeClassification",
    "Provenance",
    "UnassignedEdge",
    "classify_edges",
    "enumerate_partitions",
    "generate_candidates",
    "load_decompositions",
]
