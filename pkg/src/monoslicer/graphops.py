"""Class-level graph derivation, cycle discovery and DOT export.

Cycle discovery uses Tarjan's strongly-connected-components procedure
(iterative, so deep graphs cannot hit the recursion limit) and a bounded
variant of Johnson's elementary-circuits enumeration. Break suggestions
greedily remove the lightest edge still inside a strongly connected group
until none remains; the graph itself is never mutated.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

from .model import (
    KIND_RANK,
    BreakSuggestion,
    CallGraph,
    ClassGraph,
    CycleReport,
    NodeKind,
)


def to_class_graph(g: CallGraph) -> ClassGraph:
    """Sum method-level edge weights per container pair; conserves total weight."""
    kinds: dict[str, NodeKind] = {}
    for node in g.nodes:
        current = kinds.get(node.container)
        if current is None or KIND_RANK[node.kind] > KIND_RANK[current]:
            kinds[node.container] = node.kind
    edges: dict[tuple[str, str], int] = {}
    for (u, v), w in g.edges.items():
        key = (u.container, v.container)
        edges[key] = edges.get(key, 0) + w
    return ClassGraph.build(edges, kinds)


def call_graph_as_label_graph(g: CallGraph) -> ClassGraph:
    """View a CallGraph at method granularity, one container per method node.

    Lets cycle discovery run on method-level paths behind the same interface.
    """
    kinds = {n.label: n.kind for n in sorted(g.nodes, key=lambda n: n.sort_key)}
    edges = {(u.label, v.label): w for (u, v), w in g.edges.items()}
    return ClassGraph.build(edges, kinds)


def strongly_connected_components(
    vertices: Iterable[str], adjacency: Mapping[str, list[str]]
) -> list[list[str]]:
    """Tarjan's algorithm, iterative. Returns SCCs as sorted node lists.

    The result covers every vertex (singletons included); output order is
    deterministic for a fixed input order.
    """
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            v, start = work[-1]
            if start == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            neighbors = adjacency.get(v, [])
            recursed = False
            for j in range(start, len(neighbors)):
                w = neighbors[j]
                if w not in index:
                    work[-1] = (v, j + 1)
                    work.append((w, 0))
                    recursed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recursed:
                continue
            work.pop()
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.remove(w)
                    component.append(w)
                    if w == v:
                        break
                sccs.append(sorted(component))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


class _CycleBudgetExhausted(Exception):
    pass


def _simple_cycles(adjacency: Mapping[str, set[str]], cap: int) -> tuple[list[tuple[str, ...]], bool]:
    """All elementary circuits of the loop-free digraph, capped at `cap`.

    Johnson's scheme: process one strongly connected component at a time,
    enumerate every circuit through its least vertex, drop that vertex and
    recurse into the remaining components. Each cycle is emitted exactly
    once, rotated to start at its lexicographically smallest node.
    """
    cycles: list[tuple[str, ...]] = []

    def circuits_through(least: str, component: set[str]) -> None:
        blocked: set[str] = set()
        unblock_later: dict[str, set[str]] = {}
        path: list[str] = [least]
        blocked.add(least)

        def neighbors(v: str):
            return iter(sorted(adjacency.get(v, set()) & component))

        frames: list[tuple[str, Iterable[str], list[bool]]] = [(least, neighbors(least), [False])]
        while frames:
            v, it, found = frames[-1]
            descended = False
            for w in it:
                if w == least:
                    cycles.append(tuple(path))
                    found[0] = True
                    if len(cycles) >= cap:
                        raise _CycleBudgetExhausted
                elif w not in blocked:
                    blocked.add(w)
                    path.append(w)
                    frames.append((w, neighbors(w), [False]))
                    descended = True
                    break
            if descended:
                continue
            frames.pop()
            path.pop()
            if found[0]:
                _unblock(v, blocked, unblock_later)
            else:
                for w in sorted(adjacency.get(v, set()) & component):
                    unblock_later.setdefault(w, set()).add(v)
            if frames:
                frames[-1][2][0] = frames[-1][2][0] or found[0]

    def _unblock(v: str, blocked: set[str], unblock_later: dict[str, set[str]]) -> None:
        queue = [v]
        while queue:
            u = queue.pop()
            if u in blocked:
                blocked.remove(u)
                queue.extend(unblock_later.pop(u, ()))

    # Worklist of components, smallest least-vertex first for determinism.
    initial = [
        set(c)
        for c in strongly_connected_components(sorted(adjacency), {v: sorted(ws) for v, ws in adjacency.items()})
        if len(c) >= 2
    ]
    worklist = sorted(initial, key=min, reverse=True)
    try:
        while worklist:
            component = worklist.pop()
            least = min(component)
            circuits_through(least, component)
            remainder = component - {least}
            sub_adj = {v: sorted(adjacency.get(v, set()) & remainder) for v in sorted(remainder)}
            subs = [set(c) for c in strongly_connected_components(sorted(remainder), sub_adj) if len(c) >= 2]
            worklist.extend(sorted(subs, key=min, reverse=True))
    except _CycleBudgetExhausted:
        return cycles, True
    return cycles, False


def _multi_node_scc_membership(edges: Mapping[tuple[str, str], int]) -> dict[str, int]:
    """Map each node inside a size>=2 SCC of the loop-free graph to a group id."""
    adjacency: dict[str, list[str]] = {}
    nodes: set[str] = set()
    for (u, v), _ in sorted(edges.items()):
        if u == v:
            continue
        nodes.add(u)
        nodes.add(v)
        adjacency.setdefault(u, []).append(v)
    membership: dict[str, int] = {}
    for i, comp in enumerate(strongly_connected_components(sorted(nodes), adjacency)):
        if len(comp) >= 2:
            for v in comp:
                membership[v] = i
    return membership


def find_cycles(g: ClassGraph, max_cycles: int = 100) -> CycleReport:
    """Report SCCs, simple cycles (capped) and advisory break edges.

    `cycles` lists self-loops first (as length-1 cycles), then multi-node
    cycles; `suggested_breaks` iteratively picks the minimum-weight edge
    still inside a strongly connected group (ties by (source, target))
    until removing them all leaves no multi-node cycle. Self-loops are
    never suggested for breaking.
    """
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")

    self_loops = tuple((u, w) for (u, v), w in sorted(g.edges.items()) if u == v)
    adjacency: dict[str, set[str]] = {}
    for (u, v), _ in g.edges.items():
        if u != v:
            adjacency.setdefault(u, set()).add(v)

    all_nodes = sorted(g.nodes)
    adj_sorted = {v: sorted(ws) for v, ws in adjacency.items()}
    sccs = tuple(
        tuple(c)
        for c in sorted(
            (c for c in strongly_connected_components(all_nodes, adj_sorted) if len(c) >= 2),
            key=lambda c: c[0],
        )
    )

    cycles: list[tuple[str, ...]] = [(u,) for u, _ in self_loops]
    truncated = False
    if len(cycles) >= max_cycles:
        cycles = cycles[:max_cycles]
        truncated = len(self_loops) > max_cycles or bool(sccs)
    else:
        multi, truncated = _simple_cycles(adjacency, max_cycles - len(cycles))
        cycles.extend(multi)

    breaks: list[BreakSuggestion] = []
    remaining = {edge: w for edge, w in g.edges.items() if edge[0] != edge[1]}
    while True:
        membership = _multi_node_scc_membership(remaining)
        if not membership:
            break
        candidates = [
            (w, u, v)
            for (u, v), w in remaining.items()
            if u in membership and membership.get(v) == membership[u]
        ]
        weight, u, v = min(candidates)
        group = sorted(n for n, gid in membership.items() if gid == membership[u])
        remaining.pop((u, v))
        breaks.append(
            BreakSuggestion(
                u,
                v,
                weight,
                "minimum-weight edge within cycle group "
                f"[{', '.join(group)}]; discuss a dependency-inverting refactor "
                "(e.g. Inversion of Control) with the team",
            )
        )

    return CycleReport(
        sccs=sccs,
        self_loops=self_loops,
        cycles=tuple(cycles),
        truncated=truncated,
        suggested_breaks=tuple(breaks),
    )


def remove_edges(g: ClassGraph, edges: Iterable[tuple[str, str]]) -> ClassGraph:
    """Copy of the graph without the given edges (used to re-check break advice)."""
    dropped = set(edges)
    kept = {e: w for e, w in g.edges.items() if e not in dropped}
    return ClassGraph.build(kept, dict(g.nodes))


def export_dot(graph: CallGraph | ClassGraph, name: str = "g") -> str:
    """Render a weighted digraph as deterministic DOT text.

    Edge pen width encodes call frequency as 1 + ln(weight); node and edge
    order is lexicographic so output is byte-identical across runs.
    """
    if isinstance(graph, CallGraph):
        node_names = sorted(n.label for n in graph.nodes)
        edge_rows = [(u.label, v.label, w) for u, v, w in graph.sorted_edges()]
        edge_rows.sort()
    else:
        node_names = sorted(graph.nodes)
        edge_rows = graph.sorted_edges()

    def quote(s: str) -> str:
        return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"digraph {name} {{"]
    for n in node_names:
        lines.append(f"  {quote(n)};")
    for u, v, w in edge_rows:
        penwidth = 1.0 + math.log(w)
        lines.append(f"  {quote(u)} -> {quote(v)} [label=\"{w}\", penwidth={penwidth:.3f}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "call_graph_as_label_graph",
    "export_dot",
    "find_cycles",
    "remove_edges",
    "strongly_connected_components",
    "to_class_graph",
]
