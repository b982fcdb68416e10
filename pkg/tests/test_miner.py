"""Frequency table mining and call-graph construction."""

from collections import Counter

import pytest
from hypothesis import given, strategies as st

from monoslicer.ingest import assemble_traces, make_node, parse_log
from monoslicer.miner import (
    build_call_graph,
    merge_tables,
    node_from_label,
    node_to_label,
    path_frequency_table,
    table_from_csv,
    table_to_csv,
    top_paths,
)
from monoslicer.model import ExecutionTrace, PathFrequencyTable

from .conftest import paper_log_csv, sig, two_path_log_csv


def _trace(session, *pairs, start=0):
    nodes = tuple(make_node(c, m) for c, m in pairs)
    return ExecutionTrace(session, nodes, start, start + len(nodes))


def test_two_path_example_frequencies():
    events, _ = parse_log(two_path_log_csv(20, 3))
    table = path_frequency_table(assemble_traces(events))
    assert [row.frequency for row in table.rows] == [20, 3]


def test_empty_trace_list():
    assert path_frequency_table([]).rows == ()


def test_identical_single_event_traces_counted():
    traces = [_trace(f"S{i}", ("A", "a()")) for i in range(3)]
    table = path_frequency_table(traces)
    assert len(table.rows) == 1
    assert table.rows[0].frequency == 3


def test_table_ordering_ties_lexicographic():
    traces = [
        _trace("S1", ("B", "b()")),
        _trace("S2", ("A", "a()")),
        _trace("S3", ("A", "a()"), ("B", "b()")),
        _trace("S4", ("A", "a()")),
    ]
    table = path_frequency_table(traces)
    assert [row.frequency for row in table.rows] == [2, 1, 1]
    # frequency-1 rows tie; [A.a] sorts before [B.b]
    assert table.rows[1].signature == sig(("A", "a()"), ("B", "b()"))
    assert table.rows[2].signature == sig(("B", "b()"))


def test_four_path_graph_edges(four_path_call_graph):
    g = four_path_call_graph
    edge = {(u.label, v.label): w for (u, v), w in g.edges.items()}
    assert edge[("C.f()", "E.j()")] == 50
    assert edge[("C.e()", "C.f()")] == 250
    assert g.total_weight == 1700
    assert len(g.nodes) == 12


def test_single_path_single_edge():
    table = path_frequency_table([_trace(f"S{i}", ("X", "a()"), ("Y", "b()")) for i in range(7)])
    g = build_call_graph(table)
    assert len(g.edges) == 1
    ((u, v),) = g.edges
    assert (u.label, v.label, g.edges[(u, v)]) == ("X.a()", "Y.b()", 7)


def test_paper_log_graph_twelve_unit_edges():
    events, _ = parse_log(paper_log_csv())
    table = path_frequency_table(assemble_traces(events))
    g = build_call_graph(table)
    assert len(g.edges) == 12
    assert set(g.edges.values()) == {1}
    labels = {(u.label, v.label) for (u, v) in g.edges}
    assert ("DB.TABLE B", "B.java.c()") in labels


def test_repeated_pairs_accumulate():
    # a loop A->B->A->B contributes twice per traversal
    table = path_frequency_table(
        [_trace(f"S{i}", ("A", "a()"), ("B", "b()"), ("A", "a()"), ("B", "b()")) for i in range(5)]
    )
    g = build_call_graph(table)
    edge = {(u.label, v.label): w for (u, v), w in g.edges.items()}
    assert edge[("A.a()", "B.b()")] == 10
    assert edge[("B.b()", "A.a()")] == 5


def test_top_paths():
    events, _ = parse_log(two_path_log_csv(10, 2))
    table = path_frequency_table(assemble_traces(events))
    assert [r.frequency for r in top_paths(table, 1)] == [10]
    assert top_paths(table, 99) == list(table.rows)
    with pytest.raises(ValueError):
        top_paths(table, 0)


@st.composite
def tables(draw):
    paths = st.lists(
        st.tuples(st.sampled_from("ABC"), st.sampled_from(["a()", "b()"])), min_size=1, max_size=5
    )
    counts = {}
    for _ in range(draw(st.integers(0, 6))):
        signature = sig(*draw(paths))
        counts[signature] = counts.get(signature, 0) + draw(st.integers(1, 20))
    return PathFrequencyTable.from_counts(counts)


@given(tables())
def test_total_weight_matches_brute_force(table):
    expected = sum(r.frequency * (len(r.signature.sequence) - 1) for r in table.rows)
    assert build_call_graph(table).total_weight == expected


@given(tables())
def test_build_invariant_under_row_permutation(table):
    reversed_rows = PathFrequencyTable(tuple(reversed(table.rows)))
    assert build_call_graph(table) == build_call_graph(reversed_rows)


@given(tables(), tables())
def test_merge_additivity(a, b):
    merged = build_call_graph(merge_tables(a, b))
    separate = Counter()
    for table in (a, b):
        for edge, w in build_call_graph(table).edges.items():
            separate[edge] += w
    assert dict(separate) == dict(merged.edges)


def test_node_label_round_trip():
    for container, member in [("A.java", "b()"), ("DB", "TABLE A"), ("Form.jsp", "btnClick()")]:
        node = make_node(container, member)
        assert node_from_label(node_to_label(node)) == node


def test_table_csv_round_trip(four_path_table):
    text = table_to_csv(four_path_table)
    assert table_from_csv(text) == four_path_table
    assert text.splitlines()[0] == "path,frequency"
    assert "A.a();A.b();B.c();B.d()" in text


def test_table_json_round_trip(four_path_table):
    assert PathFrequencyTable.from_json(four_path_table.to_json()) == four_path_table
