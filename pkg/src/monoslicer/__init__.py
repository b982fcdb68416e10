"""monoslicer: mine runtime logs of a monolith, compare microservice decompositions."""

__version__ = "0.1.0"

from .decompose import (
    Candidate,
    CandidateSet,
    ClassificationResult,
    EdgeClassification,
    Provenance,
    classify_edges,
    enumerate_partitions,
    generate_candidates,
    load_decompositions,
)
from .graphops import export_dot, find_cycles, to_class_graph
from .ingest import IngestConfig, IngestError, assemble_traces, parse_log
from .metrics import (
    MetricsConfig,
    compare,
    evaluate_candidate,
    service_metrics,
    system_metrics,
)
from .miner import build_call_graph, path_frequency_table, top_paths
from .model import (
    CallGraph,
    ClassGraph,
    CycleReport,
    Decomposition,
    ExecutionTrace,
    LogEvent,
    NodeKind,
    NodeRef,
    PathFrequencyTable,
    PathSignature,
    ServiceMetrics,
    SystemMetrics,
    validate_decomposition,
)

__all__ = [
    "Candidate",
    "CandidateSet",
    "CallGraph",
    "ClassGraph",
    "ClassificationResult",
    "CycleReport",
    "Decomposition",
    "EdgeClassification",
    "ExecutionTrace",
    "IngestConfig",
    "IngestError",
    "LogEvent",
    "MetricsConfig",
    "NodeKind",
    "NodeRef",
    "PathFrequencyTable",
    "PathSignature",
    "Provenance",
    "ServiceMetrics",
    "SystemMetrics",
    "assemble_traces",
    "build_call_graph",
    "classify_edges",
    "compare",
    "enumerate_partitions",
    "evaluate_candidate",
    "export_dot",
    "find_cycles",
    "generate_candidates",
    "load_decompositions",
    "parse_log",
    "path_frequency_table",
    "service_metrics",
    "system_metrics",
    "to_class_graph",
    "top_paths",
    "validate_decomposition",
]
