"""Shared fixtures: the worked four-path example, log tables and builders."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from monoslicer.graphops import to_class_graph
from monoslicer.ingest import make_node
from monoslicer.miner import build_call_graph
from monoslicer.model import Decomposition, PathFrequencyTable, PathSignature

settings.register_profile(
    "ci", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"[{status}] acceptance: {name}")


def sig(*pairs: tuple[str, str]) -> PathSignature:
    return PathSignature(tuple(make_node(c, m) for c, m in pairs))


# Four execution paths with call counts 200 / 200 / 50 / 100; paths 3 and 4
# share E.j(), which makes E the contended class between the C+D side and
# the E+F side.
FOUR_PATHS = {
    sig(("A", "a()"), ("A", "b()"), ("B", "c()"), ("B", "d()")): 200,
    sig(("C", "e()"), ("C", "f()"), ("D", "g()"), ("D", "h()")): 200,
    sig(("C", "e()"), ("C", "f()"), ("E", "j()"), ("D", "g()"), ("D", "h()")): 50,
    sig(("E", "i()"), ("E", "j()"), ("F", "k()"), ("F", "l()")): 100,
}


@pytest.fixture
def four_path_table() -> PathFrequencyTable:
    return PathFrequencyTable.from_counts(FOUR_PATHS)


@pytest.fixture
def four_path_call_graph(four_path_table):
    return build_call_graph(four_path_table)


@pytest.fixture
def four_path_class_graph(four_path_call_graph):
    return to_class_graph(four_path_call_graph)


def split(id: str, services: dict[str, list[str]], label: str | None = None) -> Decomposition:
    return Decomposition.build(id, label or id, services)


@pytest.fixture
def split0() -> Decomposition:
    return split("split0", {"MS1": ["A", "B"], "MS2": ["C", "D"], "MS3": ["E", "F"]})


@pytest.fixture
def split1() -> Decomposition:
    return split("split1", {"MS1": ["A", "B"], "MS2": ["C", "D", "E"], "MS3": ["E", "F"]})


@pytest.fixture
def split2() -> Decomposition:
    return split("split2", {"MS1": ["A", "B"], "MS2": ["C", "D", "E", "F"]})


# The thirteen-row example log: one session from the entry-point click down
# to the datastore tables and back up to the rendered result.
PAPER_LOG_ROWS = [
    ("00:00", "00:36", "S1", "Form.jsp", "btnClick()"),
    ("01:00", "01:39", "S1", "A.java", "a()"),
    ("01:40", "01:45", "S1", "A.java", "b()"),
    ("01:45", "01:55", "S1", "B.java", "b()"),
    ("01:56", "02:05", "S1", "B.java", "c()"),
    ("02:05", "02:13", "S1", "DB.java", "query()"),
    ("02:14", "02:21", "S1", "DB", "TABLE A"),
    ("02:22", "03:28", "S1", "DB", "TABLE B"),
    ("02:29", "02:36", "S1", "B.java", "c()"),
    ("02:36", "02:45", "S1", "B.java", "b()"),
    ("02:46", "02:55", "S1", "A.java", "b()"),
    ("02:56", "03:03", "S1", "A.java", "c()"),
    ("03:04", "03:16", "S1", "Results.jsp", "render()"),
]


def paper_log_csv() -> str:
    lines = ["start_time,end_time,session_id,class,method"]
    for row in PAPER_LOG_ROWS:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


TWO_PATHS = {
    "p1": [
        ("A.java", "a()"),
        ("A.java", "b()"),
        ("B.java", "b()"),
        ("C.java", "c()"),
        ("DB.java", "query()"),
        ("DB", "TABLE A"),
        ("DB", "TABLE B"),
    ],
    "p2": [
        ("A.java", "b()"),
        ("A.java", "c()"),
        ("B.java", "a()"),
        ("C.java", "c()"),
        ("DB.java", "query()"),
        ("DB", "TABLE A"),
        ("DB", "TABLE B"),
    ],
}


def two_path_log_csv(count_p1: int = 1000, count_p2: int = 150) -> str:
    """Synthetic log with count_p1 sessions of path 1 and count_p2 of path 2."""
    lines = ["start_time,end_time,session_id,class,method"]
    session = 0
    for name, count in (("p1", count_p1), ("p2", count_p2)):
        for _ in range(count):
            session += 1
            base = session * 10_000
            for j, (container, member) in enumerate(TWO_PATHS[name]):
                start = base + j * 100
                lines.append(f"{_rfc(start)},{_rfc(start + 50)},S{session:05d},{container},{member}")
    return "\n".join(lines) + "\n"


def _ms_to_clock(ms: int) -> str:
    seconds, frac = divmod(ms, 1000)
    hours, rem = divmod(seconds, 3600)
    minutes, secs = divmod(rem, 60)
    return f"{hours:02d}:{minutes:02d}:{secs:02d}.{frac:03d}"


def _rfc(ms: int) -> str:
    return f"1970-01-01T{_ms_to_clock(ms)}Z"


def four_path_log_csv() -> str:
    """A log realizing the four-path fixture: 550 sessions, per-path counts."""
    paths = [
        ([("A", "a()"), ("A", "b()"), ("B", "c()"), ("B", "d()")], 200),
        ([("C", "e()"), ("C", "f()"), ("D", "g()"), ("D", "h()")], 200),
        ([("C", "e()"), ("C", "f()"), ("E", "j()"), ("D", "g()"), ("D", "h()")], 50),
        ([("E", "i()"), ("E", "j()"), ("F", "k()"), ("F", "l()")], 100),
    ]
    lines = ["start_time,end_time,session_id,class,method"]
    session = 0
    for path, count in paths:
        for _ in range(count):
            session += 1
            base = session * 10_000
            for j, (container, member) in enumerate(path):
                start = base + j * 100
                lines.append(f"{_rfc(start)},{_rfc(start + 50)},S{session:04d},{container},{member}")
    return "\n".join(lines) + "\n"
