"""Command-line pipeline: ingest -> mine -> cycles/propose -> evaluate/compare -> serve.

Every stage reads and writes serialized artifacts so architects can inspect
or hand-edit intermediates between steps. Exit codes: 0 success, 1 usage
error, 2 data error.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .decompose import (
    CandidateSet,
    DecompositionFormatError,
    generate_candidates,
    load_decompositions,
)
from .graphops import call_graph_as_label_graph, export_dot, find_cycles, to_class_graph
from .ingest import IngestConfig, IngestError, assemble_traces, parse_log, traces_from_json, traces_to_json
from .metrics import (
    MetricsConfig,
    compare,
    comparison_to_csv,
    comparison_to_text,
    evaluate_candidate,
)
from .miner import build_call_graph, path_frequency_table, table_from_csv, table_to_csv
from .model import CallGraph, ClassGraph, PathFrequencyTable, canonical_json

log = logging.getLogger("monoslicer")


class DataError(Exception):
    """Input data is malformed or inconsistent; maps to exit code 2."""


def _configure_logging() -> None:
    level_name = os.environ.get("MONOSLICER_LOG_LEVEL", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level_name, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _write_text(path: str, text: str) -> None:
    if path == "-":
        click.echo(text, nl=False)
        return
    Path(path).write_text(text, encoding="utf-8")
    log.info("wrote %s", path)


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read_bytes(path))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc


def _load_call_graph(path: str) -> CallGraph:
    try:
        return CallGraph.from_json(_load_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: not a call graph document ({exc})") from exc


def _load_table(path: str) -> PathFrequencyTable:
    try:
        if path.endswith(".json"):
            return PathFrequencyTable.from_json(_load_json(path))
        return table_from_csv(Path(path).read_text(encoding="utf-8"))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: not a frequency table ({exc})") from exc


def _class_graph_for(graph: CallGraph, level: str) -> ClassGraph:
    return to_class_graph(graph) if level == "class" else call_graph_as_label_graph(graph)


def _metrics_config(external_weight: str, links_mode: str, unassigned_links: bool, entrypoints_in_cla: bool) -> MetricsConfig:
    try:
        weight = Fraction(external_weight)
    except (ValueError, ZeroDivisionError) as exc:
        raise DataError(f"bad external weight {external_weight!r}") from exc
    if weight <= 0:
        raise DataError("external weight must be positive")
    return MetricsConfig(
        external_weight=weight,
        links_mode=links_mode,
        count_unassigned_links=unassigned_links,
        include_entrypoints_in_cla=entrypoints_in_cla,
    )


@click.group()
@click.version_option(version=__version__, prog_name="monoslicer")
def cli() -> None:
    """Decomposition workbench for runtime execution logs."""


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl", "auto"]), default="auto", show_default=True)
@click.option("--timestamp-format", type=click.Choice(["rfc3339", "hms", "hm", "auto"]), default="auto", show_default=True)
@click.option("--on-bad-row", type=click.Choice(["fail", "skip_and_report"]), default="fail", show_default=True)
@click.option("--session-gap", type=click.IntRange(min=1), default=None, help="Split sessions on gaps longer than this many minutes.")
@click.option("--entrypoint", "entrypoints", multiple=True, help="Container names to treat as entry points.")
def ingest(in_path, out_path, fmt, timestamp_format, on_bad_row, session_gap, entrypoints) -> None:
    """Parse an execution log and write time-ordered traces."""
    cfg = IngestConfig(
        format=fmt,
        timestamp_format=timestamp_format,
        on_bad_row=on_bad_row,
        session_gap_minutes=session_gap,
        entrypoints=frozenset(entrypoints),
    )
    try:
        events, errors = parse_log(_read_bytes(in_path), cfg)
    except IngestError as exc:
        raise DataError(str(exc)) from exc
    for err in errors:
        click.echo(f"skipped line {err.line}: {err.reason}", err=True)
    traces = assemble_traces(events, cfg)
    _write_text(out_path, canonical_json(traces_to_json(traces)))
    click.echo(f"{len(events)} events, {len(traces)} traces", err=True)


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-table", required=True, help="Frequency table (.csv, or .json for the lossless form).")
@click.option("--out-graph", required=True, help="Directly-follows call graph (JSON).")
def mine(in_path, out_table, out_graph) -> None:
    """Compute the path frequency table and the weighted call graph."""
    try:
        traces = traces_from_json(_load_json(in_path))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{in_path}: not a traces document ({exc})") from exc
    table = path_frequency_table(traces)
    graph = build_call_graph(table)
    if out_table.endswith(".json"):
        _write_text(out_table, canonical_json(table.to_json()))
    else:
        _write_text(out_table, table_to_csv(table))
    _write_text(out_graph, canonical_json(graph.to_json()))
    click.echo(f"{len(table.rows)} paths, {len(graph.nodes)} nodes, {len(graph.edges)} edges", err=True)


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--level", type=click.Choice(["class", "method"]), default="class", show_default=True)
@click.option("--max-cycles", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--out", "out_path", default=None, help="Write the cycle report as JSON.")
@click.option("--text/--no-text", default=True, help="Print a human-readable summary.")
def cycles(graph_path, level, max_cycles, out_path, text) -> None:
    """Detect circular dependencies and suggest break edges."""
    class_graph = _class_graph_for(_load_call_graph(graph_path), level)
    report = find_cycles(class_graph, max_cycles=max_cycles)
    if out_path:
        _write_text(out_path, canonical_json(report.to_json()))
    if text:
        if not report.sccs and not report.self_loops:
            click.echo("no cycles found")
        else:
            for scc in report.sccs:
                click.echo(f"cycle group: {', '.join(scc)}")
            for container, weight in report.self_loops:
                click.echo(f"self-loop: {container} ({weight} calls)")
            suffix = " (truncated)" if report.truncated else ""
            click.echo(f"{len(report.cycles)} simple cycle(s){suffix}")
            for b in report.suggested_breaks:
                click.echo(f"suggested break: {b.source} -> {b.target} (weight {b.weight})")
            if report.suggested_breaks:
                click.echo(
                    "break suggestions are advisory; every cycle may need its own "
                    "refactoring, agreed with the team"
                )


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--decompositions", "user_path", default=None, type=click.Path(exists=True, dir_okay=False), help="User-specified decompositions to include.")
@click.option("--max-candidates", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--max-shared-expansion", type=click.IntRange(min=0), default=5, show_default=True)
@click.option("--out", "out_path", required=True)
def propose(graph_path, table_path, user_path, max_candidates, max_shared_expansion, out_path) -> None:
    """Generate candidate decompositions from path structure."""
    graph = to_class_graph(_load_call_graph(graph_path))
    table = _load_table(table_path)
    user = []
    if user_path:
        try:
            user = load_decompositions(_read_bytes(user_path))
        except DecompositionFormatError as exc:
            raise DataError(f"{user_path}: {exc}") from exc
    try:
        candidates = generate_candidates(
            graph,
            table,
            max_candidates=max_candidates,
            max_shared_expansion=max_shared_expansion,
            user=user,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    _write_text(out_path, canonical_json(candidates.to_json()))
    click.echo(f"{len(candidates.candidates)} candidates", err=True)


_metric_options = [
    click.option("--external-weight", default="1000", show_default=True, help="Cost factor of an external call."),
    click.option("--links-mode", type=click.Choice(["services", "call_sites"]), default="services", show_default=True),
    click.option("--unassigned-links/--no-unassigned-links", default=True, show_default=True, help="Count calls to unassigned containers as links."),
    click.option("--entrypoints-in-cla/--no-entrypoints-in-cla", default=False, show_default=True),
]


def _with_metric_options(fn):
    for option in reversed(_metric_options):
        fn = option(fn)
    return fn


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--decompositions", "decomp_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, help="Write the evaluation report as JSON.")
@_with_metric_options
def evaluate(graph_path, decomp_path, out_path, external_weight, links_mode, unassigned_links, entrypoints_in_cla) -> None:
    """Compute CBM/CLA/DUP/FEC and system load for given decompositions."""
    graph = to_class_graph(_load_call_graph(graph_path))
    cfg = _metrics_config(external_weight, links_mode, unassigned_links, entrypoints_in_cla)
    try:
        decompositions = load_decompositions(_read_bytes(decomp_path))
    except DecompositionFormatError as exc:
        raise DataError(f"{decomp_path}: {exc}") from exc
    if not decompositions:
        raise DataError(f"{decomp_path}: no decompositions in document")
    reports = [evaluate_candidate(graph, d, cfg).to_json() for d in decompositions]
    payload = canonical_json({"reports": reports})
    if out_path:
        _write_text(out_path, payload)
    else:
        click.echo(payload, nl=False)


@cli.command("compare")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--candidates", "candidates_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", default=None, help="Write the comparison report as JSON.")
@click.option("--csv", "csv_path", default=None, help="Write per-service rows as CSV.")
@click.option("--text/--no-text", default=False, help="Print the human-readable table.")
@_with_metric_options
def compare_cmd(graph_path, candidates_path, table_path, out_path, csv_path, text, external_weight, links_mode, unassigned_links, entrypoints_in_cla) -> None:
    """Evaluate candidates side by side and flag the Pareto front."""
    graph = to_class_graph(_load_call_graph(graph_path))
    cfg = _metrics_config(external_weight, links_mode, unassigned_links, entrypoints_in_cla)
    try:
        candidates = CandidateSet.from_json(_load_json(candidates_path))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{candidates_path}: not a candidate set ({exc})") from exc
    table = _load_table(table_path) if table_path else None
    try:
        report = compare(candidates, graph, table, cfg)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if out_path:
        _write_text(out_path, canonical_json(report.to_json()))
    if csv_path:
        _write_text(csv_path, comparison_to_csv(report))
    if text or not (out_path or csv_path):
        click.echo(comparison_to_text(report), nl=False)


@cli.command("graph")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dot", "dot_path", required=True, help="Output DOT file, or - for stdout.")
@click.option("--level", type=click.Choice(["class", "method"]), default="method", show_default=True)
def graph_cmd(graph_path, dot_path, level) -> None:
    """Export the mined graph as DOT for visual inspection."""
    call_graph = _load_call_graph(graph_path)
    if level == "method":
        _write_text(dot_path, export_dot(call_graph))
    else:
        _write_text(dot_path, export_dot(to_class_graph(call_graph)))


@cli.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--table", "table_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--candidates", "candidates_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--bind", default="127.0.0.1:8400", show_default=True, help="HOST:PORT to listen on.")
@click.option("--state-file", default=None, help="Persist drafts and selection to this JSON file.")
@click.option("--allow-cors", is_flag=True, default=False, help="Permissive CORS for local UI development.")
@click.option("--ui-dir", default=None, type=click.Path(exists=True, file_okay=False), help="Serve static UI assets from this directory.")
@_with_metric_options
def serve(graph_path, table_path, candidates_path, bind, state_file, allow_cors, ui_dir, external_weight, links_mode, unassigned_links, entrypoints_in_cla) -> None:
    """Start the HTTP API (and optionally the bundled UI)."""
    import uvicorn

    from .server import Workspace, create_app

    cfg = _metrics_config(external_weight, links_mode, unassigned_links, entrypoints_in_cla)
    call_graph = _load_call_graph(graph_path)
    table = _load_table(table_path) if table_path else PathFrequencyTable(())
    candidates = None
    if candidates_path:
        try:
            candidates = CandidateSet.from_json(_load_json(candidates_path))
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"{candidates_path}: not a candidate set ({exc})") from exc
    workspace = Workspace.from_analysis(
        call_graph, table, candidates=candidates, cfg=cfg, state_file=state_file
    )
    app = create_app(workspace, allow_cors=allow_cors, ui_dir=ui_dir)
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--bind expects HOST:PORT, got {bind!r}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    _configure_logging()
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except (IngestError, DecompositionFormatError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
