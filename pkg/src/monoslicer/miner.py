"""Path frequency mining and directly-follows call-graph construction."""

from __future__ import annotations

import csv
import io
from collections import Counter

from .ingest import make_node
from .model import (
    CallGraph,
    ExecutionTrace,
    NodeRef,
    PathFrequencyTable,
    PathRow,
    PathSignature,
)


def path_frequency_table(traces: list[ExecutionTrace]) -> PathFrequencyTable:
    """One row per distinct path signature; frequency counts matching traces."""
    counts = Counter(t.signature for t in traces)
    return PathFrequencyTable.from_counts(counts)


def build_call_graph(table: PathFrequencyTable) -> CallGraph:
    """Directly-follows graph: each consecutive pair in a path adds its row frequency.

    Repeated pairs inside one path each count (a loop A->B->A->B at
    frequency f contributes 2f to A->B); the node set is the union of all
    path elements, so single-node paths still contribute nodes.
    """
    edges: Counter[tuple[NodeRef, NodeRef]] = Counter()
    nodes: set[NodeRef] = set()
    for row in table.rows:
        seq = row.signature.sequence
        nodes.update(seq)
        for u, v in zip(seq, seq[1:]):
            edges[(u, v)] += row.frequency
    return CallGraph.build(edges, extra_nodes=nodes)


def top_paths(table: PathFrequencyTable, n: int) -> list[PathRow]:
    """First min(n, len(rows)) rows in table order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(table.rows[:n])


def merge_tables(a: PathFrequencyTable, b: PathFrequencyTable) -> PathFrequencyTable:
    counts: Counter[PathSignature] = Counter()
    for table in (a, b):
        for row in table.rows:
            counts[row.signature] += row.frequency
    return PathFrequencyTable.from_counts(counts)


def node_to_label(node: NodeRef) -> str:
    return f"{node.container}.{node.member}"


def node_from_label(label: str) -> NodeRef:
    """Inverse of node_to_label under the last-dot split rule.

    "A.java.b()" -> (A.java, b()); "DB.TABLE A" -> (DB, TABLE A). Members
    containing dots do not survive this form; use the JSON table for those.
    """
    container, _, member = label.rpartition(".")
    if not container or not member:
        raise ValueError(f"cannot split path element {label!r}")
    return make_node(container.strip(), member.strip())


def table_to_csv(table: PathFrequencyTable) -> str:
    """Frequency table as CSV: path (semicolon-joined elements), frequency."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["path", "frequency"])
    for row in table.rows:
        writer.writerow([";".join(node_to_label(n) for n in row.signature.sequence), row.frequency])
    return out.getvalue()


def table_from_csv(text: str) -> PathFrequencyTable:
    reader = csv.reader(io.StringIO(text))
    counts: Counter[PathSignature] = Counter()
    for idx, fields in enumerate(reader):
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if idx == 0 and [f.strip() for f in fields] == ["path", "frequency"]:
            continue
        if len(fields) != 2:
            raise ValueError(f"frequency table row {idx + 1}: expected 2 fields")
        path, freq = fields
        sequence = tuple(node_from_label(part) for part in path.split(";") if part.strip())
        if not sequence:
            raise ValueError(f"frequency table row {idx + 1}: empty path")
        counts[PathSignature(sequence)] += int(freq)
    return PathFrequencyTable.from_counts(counts)


__all__ = [
    "build_call_graph",
    "merge_tables",
    "node_from_label",
    "node_to_label",
    "path_frequency_table",
    "table_from_csv",
    "table_to_csv",
    "top_paths",
]
