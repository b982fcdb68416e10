"""Log ingestion: parse CSV/JSONL execution logs and assemble per-session traces."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .model import (
    MINUTE_MS,
    ExecutionTrace,
    LogEvent,
    NodeKind,
    NodeRef,
    format_timestamp,
    parse_timestamp_rfc3339,
)

CSV_HEADER = ["start_time", "end_time", "session_id", "class", "method"]
JSONL_KEYS = ["start", "end", "session", "class", "method"]


class IngestError(Exception):
    """Fatal ingest failure (unknown format, or first bad row under fail mode)."""


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str

    def to_json(self) -> dict:
        return {"line": self.line, "reason": self.reason}


@dataclass(frozen=True)
class IngestConfig:
    format: str = "auto"  # csv | jsonl | auto
    timestamp_format: str = "auto"  # rfc3339 | hms | hm | auto
    on_bad_row: str = "fail"  # fail | skip_and_report
    session_gap_minutes: int | None = None
    entrypoints: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.format not in ("csv", "jsonl", "auto"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.timestamp_format not in ("rfc3339", "hms", "hm", "auto"):
            raise ValueError(f"unknown timestamp format {self.timestamp_format!r}")
        if self.on_bad_row not in ("fail", "skip_and_report"):
            raise ValueError(f"unknown on_bad_row policy {self.on_bad_row!r}")
        if self.session_gap_minutes is not None and self.session_gap_minutes <= 0:
            raise ValueError("session_gap_minutes must be positive")


def classify_node(container: str, member: str, entrypoints: frozenset[str] = frozenset()) -> NodeKind:
    """Infer node kind from the container/member pair alone.

    "DB" containers and TABLE-style members are datastore accesses; .jsp
    containers (or configured entry points) are UI/API entry points.
    """
    if container.lower() == "db" or member.upper().startswith("TABLE "):
        return NodeKind.DATA_STORE
    if container.lower().endswith(".jsp") or container in entrypoints:
        return NodeKind.ENTRY_POINT
    return NodeKind.CLASS_METHOD


def make_node(container: str, member: str, entrypoints: frozenset[str] = frozenset()) -> NodeRef:
    return NodeRef(classify_node(container, member, entrypoints), container, member)


def detect_format(data: bytes) -> str:
    for byte in data:
        if byte in b" \t\r\n":
            continue
        return "jsonl" if byte == ord("{") else "csv"
    return "csv"  # empty input parses to no events


def parse_timestamp(text: str, fmt: str) -> int:
    """Parse one timestamp to epoch milliseconds.

    Short forms (HH:MM:SS, HH:MM) are anchored to 1970-01-01 UTC so ordering
    is well defined within a file.
    """
    text = text.strip()
    if fmt == "auto":
        if "T" in text or "-" in text:
            fmt = "rfc3339"
        elif text.count(":") == 2:
            fmt = "hms"
        else:
            fmt = "hm"
    if fmt == "rfc3339":
        return parse_timestamp_rfc3339(text)
    parts = text.split(":")
    expected = 3 if fmt == "hms" else 2
    if len(parts) != expected or not all(p.isdigit() for p in parts):
        raise ValueError(f"not a {fmt.upper()} timestamp: {text!r}")
    numbers = [int(p) for p in parts] + [0] * (3 - len(parts))
    hours, minutes, seconds = numbers
    if not (hours < 24 and minutes < 60 and seconds < 60):
        raise ValueError(f"timestamp out of range: {text!r}")
    return (hours * 3600 + minutes * 60 + seconds) * 1000


def parse_log(data: bytes | str, cfg: IngestConfig = IngestConfig()) -> tuple[list[LogEvent], list[RowError]]:
    """Parse a full log into events (in file order) plus per-row errors.

    With on_bad_row="fail" the first bad row raises IngestError; with
    "skip_and_report" bad rows are collected and parsing continues.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    fmt = cfg.format
    if fmt == "auto":
        fmt = detect_format(data)
    text = data.decode("utf-8")
    if fmt == "jsonl":
        rows = _iter_jsonl_rows(text)
    else:
        rows = _iter_csv_rows(text)

    events: list[LogEvent] = []
    errors: list[RowError] = []
    for line_no, row, problem in rows:
        if problem is None:
            event, problem = _build_event(row, cfg)
        else:
            event = None
        if problem is not None:
            if cfg.on_bad_row == "fail":
                raise IngestError(f"line {line_no}: {problem}")
            errors.append(RowError(line_no, problem))
            continue
        events.append(event)
    return events, errors


def _iter_csv_rows(text: str):
    """Yield (line_no, field_dict_or_None, problem_or_None) for a CSV log."""
    reader = csv.reader(io.StringIO(text))
    header: list[str] | None = None
    for line_no, fields in enumerate(reader, start=1):
        if not fields or (len(fields) == 1 and not fields[0].strip()):
            continue
        if header is None:
            header = [f.strip() for f in fields]
            if header != CSV_HEADER:
                raise IngestError(
                    f"line {line_no}: bad CSV header {','.join(header)!r}; "
                    f"expected {','.join(CSV_HEADER)!r}"
                )
            continue
        if len(fields) < len(CSV_HEADER):
            missing = CSV_HEADER[len(fields)]
            yield line_no, None, f"missing column '{missing}'"
            continue
        if len(fields) > len(CSV_HEADER):
            yield line_no, None, f"unexpected extra fields ({len(fields)})"
            continue
        yield line_no, dict(zip(CSV_HEADER, fields)), None
    if header is None and text.strip():
        raise IngestError("line 1: missing CSV header")


def _iter_jsonl_rows(text: str):
    """Yield (line_no, field_dict_or_None, problem_or_None) for a JSONL log."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, None, f"malformed JSON: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield line_no, None, "JSONL row is not an object"
            continue
        missing = [k for k in JSONL_KEYS if k not in obj]
        if missing:
            yield line_no, None, f"missing column '{missing[0]}'"
            continue
        row = {
            "start_time": str(obj["start"]),
            "end_time": str(obj["end"]),
            "session_id": str(obj["session"]),
            "class": str(obj["class"]),
            "method": str(obj["method"]),
        }
        yield line_no, row, None


def _build_event(row: dict, cfg: IngestConfig) -> tuple[LogEvent | None, str | None]:
    session = row["session_id"].strip()
    if not session:
        return None, "empty session_id"
    container = row["class"].strip()
    if not container:
        return None, "missing column 'class'"
    member = row["method"].strip()
    if not member:
        return None, "missing column 'method'"
    try:
        start = parse_timestamp(row["start_time"], cfg.timestamp_format)
        end = parse_timestamp(row["end_time"], cfg.timestamp_format)
    except ValueError as exc:
        return None, f"unparseable timestamp: {exc}"
    if start > end:
        return None, f"start_time after end_time ({row['start_time'].strip()} > {row['end_time'].strip()})"
    node = make_node(container, member, cfg.entrypoints)
    return LogEvent(start, end, session, node), None


def emit_events_csv(events: list[LogEvent]) -> str:
    """Serialize events back to the canonical CSV form (RFC3339 timestamps)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for ev in events:
        writer.writerow(
            [
                format_timestamp(ev.start_time),
                format_timestamp(ev.end_time),
                ev.session_id,
                ev.node.container,
                ev.node.member,
            ]
        )
    return out.getvalue()


def assemble_traces(events: list[LogEvent], cfg: IngestConfig = IngestConfig()) -> list[ExecutionTrace]:
    """Group events into per-session, time-ordered traces.

    One trace per session_id; when session_gap_minutes is set, a session is
    additionally split where the gap between consecutive events exceeds it.
    Within a trace events are sorted by (start_time, input order); traces are
    sorted by (first_start, session_id, input order).
    """
    by_session: dict[str, list[tuple[int, LogEvent]]] = {}
    for idx, ev in enumerate(events):
        by_session.setdefault(ev.session_id, []).append((idx, ev))

    gap_ms = cfg.session_gap_minutes * MINUTE_MS if cfg.session_gap_minutes else None
    traces: list[tuple[int, str, int, ExecutionTrace]] = []
    for session, items in by_session.items():
        items.sort(key=lambda pair: (pair[1].start_time, pair[0]))
        chunks: list[list[tuple[int, LogEvent]]] = [[]]
        for idx, ev in items:
            current = chunks[-1]
            if (
                gap_ms is not None
                and current
                and ev.start_time - current[-1][1].end_time > gap_ms
            ):
                chunks.append([])
                current = chunks[-1]
            current.append((idx, ev))
        for chunk in chunks:
            trace = ExecutionTrace(
                session_id=session,
                events=tuple(ev.node for _, ev in chunk),
                first_start=chunk[0][1].start_time,
                last_end=max(ev.end_time for _, ev in chunk),
            )
            traces.append((trace.first_start, session, chunk[0][0], trace))

    traces.sort(key=lambda t: (t[0], t[1], t[2]))
    return [t[3] for t in traces]


def traces_to_json(traces: list[ExecutionTrace]) -> dict:
    return {"traces": [t.to_json() for t in traces]}


def traces_from_json(data: dict) -> list[ExecutionTrace]:
    return [ExecutionTrace.from_json(t) for t in data["traces"]]


__all__ = [
    "CSV_HEADER",
    "IngestConfig",
    "IngestError",
    "RowError",
    "assemble_traces",
    "classify_node",
    "detect_format",
    "emit_events_csv",
    "make_node",
    "parse_log",
    "parse_timestamp",
    "traces_from_json",
    "traces_to_json",
]
