"""Measurement framework: CBM, CLA, DUP, FEC, system load and candidate comparison.

Per service: CBM = distinct external links / class count, FEC = outgoing
external call instances / class count. System load = internal calls +
weight x external calls (weight defaults to 1000, i.e. an external call is
a thousand times heavier than an internal one). All ratios are exact
rationals; rendering rounds half-up to 2 decimals at the report boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .decompose import CandidateSet, ClassificationResult, classify_edges
from .model import (
    ClassGraph,
    Decomposition,
    NodeKind,
    PathFrequencyTable,
    ServiceMetrics,
    SystemMetrics,
    ValidationResult,
    render_number,
    round_half_up,
    validate_decomposition,
)

COMPARISON_OBJECTIVES = ("mean_cbm", "max_cla", "duplicated_classes_total", "load")

COMPARISON_NOTE = (
    "No total order is imposed: candidates are only flagged as Pareto-optimal "
    "under the objectives above (all minimized); selecting a decomposition "
    "remains the architect's call."
)


@dataclass(frozen=True)
class MetricsConfig:
    external_weight: Fraction = Fraction(1000)
    links_mode: str = "services"  # "services" | "call_sites"
    count_unassigned_links: bool = True
    include_entrypoints_in_cla: bool = False

    def __post_init__(self):
        if self.external_weight <= 0:
            raise ValueError("external_weight must be positive")
        if self.links_mode not in ("services", "call_sites"):
            raise ValueError(f"unknown links_mode {self.links_mode!r}")


DEFAULT_CONFIG = MetricsConfig()


def _class_containers(g: ClassGraph, cfg: MetricsConfig) -> set[str]:
    """Containers that count toward CLA: classes, plus entry points if configured.

    Datastores are tables, not classes; they participate in graphs and may be
    assigned to services but never count toward size.
    """
    out = set()
    for container, kind in g.nodes.items():
        if kind == NodeKind.CLASS_METHOD:
            out.add(container)
        elif kind == NodeKind.ENTRY_POINT and cfg.include_entrypoints_in_cla:
            out.add(container)
    return out


def service_metrics(
    g: ClassGraph,
    d: Decomposition,
    result: ClassificationResult,
    cfg: MetricsConfig = DEFAULT_CONFIG,
) -> list[ServiceMetrics]:
    """Per-service CBM/CLA/DUP/FEC, one row per service, sorted by name.

    Links count distinct external target services reached by edges attributed
    to the service (an external service called several times, even by
    different classes, counts once); with links_mode="call_sites" distinct
    external (source, target) container pairs are counted instead. Calls to
    containers assigned to no service add one link per distinct such
    container when count_unassigned_links is on, but never add call
    instances (those edges are excluded from classification).
    """
    class_set = _class_containers(g, cfg)
    services_of: dict[str, list[str]] = {}
    for service, containers in d.assignment.items():
        for c in containers:
            services_of.setdefault(c, []).append(service)

    external_by_service: dict[str, list] = {s: [] for s in d.assignment}
    for c in result.classifications:
        if c.verdict == "external":
            external_by_service[c.attributed_service].append(c)

    unassigned_targets: dict[str, set] = {s: set() for s in d.assignment}
    if cfg.count_unassigned_links:
        for edge in result.unassigned_edges:
            if edge.source in services_of and edge.target not in services_of:
                attributed = min(services_of[edge.source])
                key = (edge.source, edge.target) if cfg.links_mode == "call_sites" else edge.target
                unassigned_targets[attributed].add(key)

    rows: list[ServiceMetrics] = []
    for service in sorted(d.assignment):
        containers = d.assignment[service]
        class_members = containers & class_set
        cla = len(class_members)
        dup = sum(1 for c in class_members if len(services_of[c]) >= 2)
        external = external_by_service[service]
        if cfg.links_mode == "call_sites":
            link_keys = {(c.source, c.target) for c in external}
        else:
            link_keys = {c.target_service for c in external}
        links = len(link_keys) + len(unassigned_targets[service])
        instances = sum(c.weight for c in external)
        cbm = Fraction(links, cla) if cla else None
        fec = Fraction(instances, cla) if cla else None
        rows.append(ServiceMetrics(service, cla, links, cbm, dup, instances, fec))
    return rows


def system_metrics(
    g: ClassGraph,
    d: Decomposition,
    result: ClassificationResult,
    cfg: MetricsConfig = DEFAULT_CONFIG,
) -> SystemMetrics:
    """Whole-system call split and weighted load for one decomposition."""
    internal = result.internal_weight
    external = result.external_weight
    load = internal + cfg.external_weight * external
    class_set = _class_containers(g, cfg)
    dup_total = sum(1 for c in d.duplicated_containers() if c in class_set)
    return SystemMetrics(internal, external, cfg.external_weight, load, dup_total)


@dataclass(frozen=True)
class CandidateSummary:
    mean_cbm: Fraction
    max_cla: int
    duplicated_classes_total: int
    load: Fraction

    @property
    def objective_vector(self) -> tuple:
        return (self.mean_cbm, self.max_cla, self.duplicated_classes_total, self.load)

    def to_json(self) -> dict:
        return {
            "mean_cbm": round_half_up(self.mean_cbm),
            "max_cla": self.max_cla,
            "duplicated_classes_total": self.duplicated_classes_total,
            "load": render_number(self.load),
        }


@dataclass(frozen=True)
class CandidateEvaluation:
    id: str
    label: str
    provenance: str
    validation: ValidationResult
    services: tuple[ServiceMetrics, ...]
    system: SystemMetrics
    summary: CandidateSummary
    pareto_optimal: bool = False
    unassigned_containers: tuple[str, ...] = ()
    external_edges: tuple[dict, ...] = ()

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "provenance": self.provenance,
            "validation": self.validation.to_json(),
            "services": [m.to_json() for m in self.services],
            "system": self.system.to_json(),
            "summary": self.summary.to_json(),
            "pareto_optimal": self.pareto_optimal,
            "unassigned_containers": list(self.unassigned_containers),
            "external_edges": [dict(e) for e in self.external_edges],
        }


@dataclass(frozen=True)
class ComparisonReport:
    objectives: tuple[str, ...]
    note: str
    path_count: int | None
    candidates: tuple[CandidateEvaluation, ...]

    def to_json(self) -> dict:
        return {
            "objectives": list(self.objectives),
            "note": self.note,
            "path_count": self.path_count,
            "candidates": [c.to_json() for c in self.candidates],
        }


def summarize(services: Iterable[ServiceMetrics], system: SystemMetrics) -> CandidateSummary:
    sized = [m for m in services if m.cla >= 1]
    if sized:
        mean_cbm = sum((m.cbm for m in sized), Fraction(0)) / len(sized)
    else:
        mean_cbm = Fraction(0)
    max_cla = max((m.cla for m in sized), default=0)
    return CandidateSummary(mean_cbm, max_cla, system.duplicated_classes_total, system.load)


def dominates(a: tuple, b: tuple) -> bool:
    """Minimization dominance: a <= b everywhere and < somewhere."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def pareto_flags(vectors: list[tuple]) -> list[bool]:
    return [
        not any(dominates(other, v) for j, other in enumerate(vectors) if j != i)
        for i, v in enumerate(vectors)
    ]


def evaluate_candidate(
    g: ClassGraph,
    d: Decomposition,
    cfg: MetricsConfig = DEFAULT_CONFIG,
    provenance: str = "user_specified",
) -> CandidateEvaluation:
    """Full per-decomposition evaluation used by the CLI, compare and the API."""
    validation = validate_decomposition(d, g)
    result = classify_edges(g, d)
    services = tuple(service_metrics(g, d, result, cfg))
    system = system_metrics(g, d, result, cfg)
    external_edges = tuple(
        {
            "source": c.source,
            "target": c.target,
            "weight": c.weight,
            "source_service": c.attributed_service,
            "target_service": c.target_service,
        }
        for c in result.classifications
        if c.verdict == "external"
    )
    return CandidateEvaluation(
        id=d.id,
        label=d.label,
        provenance=provenance,
        validation=validation,
        services=services,
        system=system,
        summary=summarize(services, system),
        unassigned_containers=result.unassigned_containers,
        external_edges=external_edges,
    )


def compare(
    candidates: CandidateSet,
    g: ClassGraph,
    table: PathFrequencyTable | None = None,
    cfg: MetricsConfig = DEFAULT_CONFIG,
) -> ComparisonReport:
    """Evaluate every candidate and flag the Pareto front; imposes no ranking."""
    if not candidates.candidates:
        raise ValueError("compare requires at least one candidate")
    evaluations = [
        evaluate_candidate(g, c.decomposition, cfg, provenance=c.provenance.value)
        for c in candidates.candidates
    ]
    flags = pareto_flags([e.summary.objective_vector for e in evaluations])
    flagged = tuple(
        CandidateEvaluation(
            id=e.id,
            label=e.label,
            provenance=e.provenance,
            validation=e.validation,
            services=e.services,
            system=e.system,
            summary=e.summary,
            pareto_optimal=flag,
            unassigned_containers=e.unassigned_containers,
            external_edges=e.external_edges,
        )
        for e, flag in zip(evaluations, flags)
    )
    return ComparisonReport(
        objectives=COMPARISON_OBJECTIVES,
        note=COMPARISON_NOTE,
        path_count=len(table.rows) if table is not None else None,
        candidates=flagged,
    )


def comparison_to_csv(report: ComparisonReport) -> str:
    """One row per service per candidate."""
    lines = [
        "candidate,label,provenance,pareto_optimal,service,cbm,links,classes,dup_classes,fec,external_call_instances"
    ]
    for cand in report.candidates:
        for m in cand.services:
            lines.append(
                ",".join(
                    [
                        cand.id,
                        _csv_field(cand.label),
                        cand.provenance,
                        str(cand.pareto_optimal).lower(),
                        m.service,
                        "" if m.cbm is None else round_half_up(m.cbm),
                        str(m.links),
                        str(m.cla),
                        str(m.dup),
                        "" if m.fec is None else round_half_up(m.fec),
                        str(m.external_call_instances),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def _csv_field(value: str) -> str:
    if "," in value or '"' in value:
        return '"' + value.replace('"', '""') + '"'
    return value


def comparison_to_text(report: ComparisonReport) -> str:
    """Human-readable blocks mirroring the classic decomposition-metrics layout."""
    out = []
    out.append(f"objectives (all minimized): {', '.join(report.objectives)}")
    out.append(report.note)
    header = f"{'MS':<14} {'CBM':>6} {'#Links':>7} {'#Classes':>9} {'#Dupl. Classes':>15} {'FEC':>10}"
    for cand in report.candidates:
        badge = "  [pareto-optimal]" if cand.pareto_optimal else ""
        out.append("")
        out.append(f"== {cand.id} ({cand.label}){badge}")
        out.append(header)
        for m in cand.services:
            cbm = "-" if m.cbm is None else round_half_up(m.cbm)
            fec = "-" if m.fec is None else round_half_up(m.fec)
            out.append(
                f"{m.service:<14} {cbm:>6} {m.links:>7} {m.cla:>9} {m.dup:>15} {fec:>10}"
            )
        sysm = cand.system
        out.append(
            f"system: internal={render_number(Fraction(sysm.internal_calls))} "
            f"external={render_number(Fraction(sysm.external_calls))} "
            f"load={render_number(sysm.load)} "
            f"duplicated_classes={sysm.duplicated_classes_total}"
        )
        if cand.unassigned_containers:
            out.append(f"unassigned containers: {', '.join(cand.unassigned_containers)}")
        for warning in cand.validation.warnings:
            out.append(f"warning: {warning}")
        for error in cand.validation.errors:
            out.append(f"ERROR: {error}")
    return "\n".join(out) + "\n"


__all__ = [
    "COMPARISON_NOTE",
    "COMPARISON_OBJECTIVES",
    "CandidateEvaluation",
    "CandidateSummary",
    "ComparisonReport",
    "DEFAULT_CONFIG",
    "MetricsConfig",
    "compare",
    "comparison_to_csv",
    "comparison_to_text",
    "dominates",
    "evaluate_candidate",
    "pareto_flags",
    "service_metrics",
    "summarize",
    "system_metrics",
]
