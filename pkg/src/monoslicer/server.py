"""HTTP API over a loaded analysis: inspect the graph, edit drafts, evaluate live.

The analysis snapshot (graphs, paths, cycles, candidates) is immutable after
load; drafts are the only mutable state. Draft edits are applied to a copy,
validated, then committed under a per-draft lock, so each draft's edit
sequence is linearized while reads stay lock-free on immutable snapshots.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import Response

from .decompose import CandidateSet
from .graphops import find_cycles, to_class_graph
from .metrics import (
    DEFAULT_CONFIG,
    COMPARISON_NOTE,
    COMPARISON_OBJECTIVES,
    MetricsConfig,
    evaluate_candidate,
    pareto_flags,
)
from .miner import node_to_label, top_paths
from .model import (
    CallGraph,
    ClassGraph,
    CycleReport,
    Decomposition,
    PathFrequencyTable,
    canonical_json,
)


class ApiError(Exception):
    def __init__(self, status: int, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.violations = violations or []

    def body(self) -> dict:
        data = {"error": self.message}
        if self.violations:
            data["violations"] = self.violations
        return data


@dataclass
class Draft:
    id: str
    label: str
    services: dict[str, set[str]]
    version: int = 1

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "version": self.version,
            "services": {name: sorted(cs) for name, cs in sorted(self.services.items())},
        }

    def to_decomposition(self) -> Decomposition:
        services = {name: cs for name, cs in self.services.items() if cs}
        if not services:
            raise ApiError(422, "draft has no non-empty service", ["no non-empty service"])
        return Decomposition.build(self.id, self.label, services)


class Workspace:
    """One loaded analysis plus mutable drafts and the recorded selection."""

    def __init__(
        self,
        call_graph: CallGraph,
        class_graph: ClassGraph,
        table: PathFrequencyTable,
        cycles: CycleReport,
        candidates: CandidateSet | None = None,
        cfg: MetricsConfig = DEFAULT_CONFIG,
        state_file: str | None = None,
    ):
        self.call_graph = call_graph
        self.class_graph = class_graph
        self.table = table
        self.cycles = cycles
        self.candidates = candidates
        self.cfg = cfg
        self.state_file = state_file
        self.drafts: dict[str, Draft] = {}
        self.selection: str | None = None
        self._next_draft = 1
        self._lock = threading.RLock()
        self._draft_locks: dict[str, threading.Lock] = {}
        if state_file and os.path.exists(state_file):
            self._load_state()

    @classmethod
    def from_analysis(
        cls,
        call_graph: CallGraph,
        table: PathFrequencyTable,
        candidates: CandidateSet | None = None,
        cfg: MetricsConfig = DEFAULT_CONFIG,
        state_file: str | None = None,
    ) -> "Workspace":
        class_graph = to_class_graph(call_graph)
        cycles = find_cycles(class_graph)
        return cls(call_graph, class_graph, table, cycles, candidates, cfg, state_file)

    # -- draft management ------------------------------------------------

    def create_draft(self, label: str, services: dict[str, set[str]]) -> Draft:
        violations = self._check_containers(services)
        if violations:
            raise ApiError(422, "draft violates decomposition invariants", violations)
        with self._lock:
            draft_id = f"draft-{self._next_draft}"
            self._next_draft += 1
            draft = Draft(draft_id, label or draft_id, {k: set(v) for k, v in services.items()})
            self.drafts[draft_id] = draft
            self._draft_locks[draft_id] = threading.Lock()
            self._save_state()
            return draft

    def get_draft(self, draft_id: str) -> Draft:
        with self._lock:
            draft = self.drafts.get(draft_id)
        if draft is None:
            raise ApiError(404, f"unknown draft {draft_id!r}")
        return draft

    def patch_draft(self, draft_id: str, operations: list[dict], expected_version: int | None) -> Draft:
        with self._lock:
            lock = self._draft_locks.get(draft_id)
        if lock is None:
            raise ApiError(404, f"unknown draft {draft_id!r}")
        with lock:
            draft = self.get_draft(draft_id)
            if expected_version is not None and expected_version != draft.version:
                raise ApiError(409, f"stale draft version {expected_version} (current {draft.version})")
            services = {name: set(cs) for name, cs in draft.services.items()}
            for op in operations:
                self._apply_op(services, op)
            violations = self._check_containers(services)
            if violations:
                raise ApiError(422, "edit violates decomposition invariants", violations)
            draft.services = services
            draft.version += 1
            self._save_state()
            return draft

    def _apply_op(self, services: dict[str, set[str]], op: dict) -> None:
        if not isinstance(op, dict) or "op" not in op:
            raise ApiError(400, "each operation needs an 'op' field")
        kind = op["op"]
        if kind == "assign":
            container, service = _required(op, "container", "service")
            services.setdefault(service, set()).add(container)
        elif kind == "unassign":
            (container,) = _required(op, "container")
            targets = [op["service"]] if "service" in op else list(services)
            for service in targets:
                if service not in services:
                    raise ApiError(422, f"unknown service {service!r}", [f"unknown service {service!r}"])
                services[service].discard(container)
        elif kind == "duplicate":
            container, targets = _required(op, "container", "services")
            if not isinstance(targets, list) or not targets:
                raise ApiError(400, "duplicate needs a non-empty 'services' list")
            for service in targets:
                services.setdefault(service, set()).add(container)
        elif kind == "rename_service":
            old, new = _required(op, "from", "to")
            if old not in services:
                raise ApiError(422, f"unknown service {old!r}", [f"unknown service {old!r}"])
            if not new:
                raise ApiError(422, "service names must be non-empty", ["empty service name"])
            members = services.pop(old)
            services.setdefault(new, set()).update(members)
        elif kind == "merge_services":
            sources, target = _required(op, "services", "into")
            if not isinstance(sources, list) or not sources:
                raise ApiError(400, "merge_services needs a non-empty 'services' list")
            for source in sources:
                if source not in services:
                    raise ApiError(422, f"unknown service {source!r}", [f"unknown service {source!r}"])
            merged: set[str] = set()
            for source in sources:
                merged.update(services.pop(source))
            services.setdefault(target, set()).update(merged)
        else:
            raise ApiError(400, f"unknown operation {kind!r}")

    def _check_containers(self, services: dict[str, set[str]]) -> list[str]:
        known = set(self.class_graph.nodes)
        violations = []
        for name in sorted(services):
            if not name:
                violations.append("empty service name")
            for c in sorted(services[name]):
                if c not in known:
                    violations.append(f"unknown container {c!r}")
        return violations

    # -- lookups ----------------------------------------------------------

    def find_decomposition(self, any_id: str) -> tuple[Decomposition, str] | None:
        """Resolve an id to (decomposition, provenance); drafts shadow candidates."""
        with self._lock:
            draft = self.drafts.get(any_id)
        if draft is not None:
            return draft.to_decomposition(), "draft"
        if self.candidates is not None:
            candidate = self.candidates.find(any_id)
            if candidate is not None:
                return candidate.decomposition, candidate.provenance.value
        return None

    def set_selection(self, any_id: str) -> None:
        if self.find_decomposition(any_id) is None:
            raise ApiError(404, f"unknown draft or candidate {any_id!r}")
        with self._lock:
            self.selection = any_id
            self._save_state()

    # -- persistence -------------------------------------------------------

    def _save_state(self) -> None:
        if not self.state_file:
            return
        state = {
            "drafts": {
                d.id: {"label": d.label, "version": d.version, "services": {k: sorted(v) for k, v in d.services.items()}}
                for d in self.drafts.values()
            },
            "selection": self.selection,
            "next_draft": self._next_draft,
        }
        tmp = f"{self.state_file}.tmp"
        Path(tmp).write_text(canonical_json(state), encoding="utf-8")
        os.replace(tmp, self.state_file)

    def _load_state(self) -> None:
        state = json.loads(Path(self.state_file).read_text(encoding="utf-8"))
        for draft_id, data in state.get("drafts", {}).items():
            self.drafts[draft_id] = Draft(
                id=draft_id,
                label=data.get("label", draft_id),
                services={k: set(v) for k, v in data.get("services", {}).items()},
                version=int(data.get("version", 1)),
            )
            self._draft_locks[draft_id] = threading.Lock()
        self.selection = state.get("selection")
        self._next_draft = int(state.get("next_draft", len(self.drafts) + 1))


def _required(op: dict, *keys: str):
    values = []
    for key in keys:
        if key not in op:
            raise ApiError(400, f"operation {op.get('op')!r} needs field {key!r}")
        values.append(op[key])
    return values


def _json_response(data, status: int = 200) -> Response:
    return Response(content=canonical_json(data), status_code=status, media_type="application/json")


async def _read_body(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        return {}
    try:
        body = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ApiError(400, f"malformed JSON body: {exc.msg}")
    if not isinstance(body, dict):
        raise ApiError(400, "request body must be a JSON object")
    return body


def create_app(workspace: Workspace, allow_cors: bool = False, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="monoslicer", docs_url=None, redoc_url=None)

    if allow_cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return _json_response(exc.body(), status=exc.status)

    @app.get("/api/graph")
    def get_graph():
        return _json_response(workspace.class_graph.to_json())

    @app.get("/api/paths")
    def get_paths(limit: int = 50):
        if limit < 1:
            raise ApiError(400, "limit must be >= 1")
        rows = top_paths(workspace.table, limit)
        return _json_response(
            {
                "total": len(workspace.table.rows),
                "rows": [
                    {
                        "path": [node_to_label(n) for n in row.signature.sequence],
                        "signature": row.signature.to_json(),
                        "frequency": row.frequency,
                    }
                    for row in rows
                ],
            }
        )

    @app.get("/api/cycles")
    def get_cycles():
        return _json_response(workspace.cycles.to_json())

    @app.get("/api/candidates")
    def get_candidates():
        if workspace.candidates is None:
            return _json_response({"candidates": []})
        return _json_response(workspace.candidates.to_json())

    @app.get("/api/drafts")
    def list_drafts():
        with workspace._lock:
            drafts = sorted(workspace.drafts.values(), key=lambda d: d.id)
            return _json_response({"drafts": [d.to_json() for d in drafts]})

    @app.post("/api/drafts")
    async def create_draft(request: Request):
        body = await _read_body(request)
        if "from_candidate" in body:
            resolved = workspace.find_decomposition(str(body["from_candidate"]))
            if resolved is None:
                raise ApiError(404, f"unknown candidate {body['from_candidate']!r}")
            source, _ = resolved
            label = body.get("label", f"from {source.id}")
            services = {name: set(cs) for name, cs in source.assignment.items()}
        else:
            label = body.get("label", "")
            raw = body.get("services", {})
            if not isinstance(raw, dict):
                raise ApiError(400, "'services' must be an object")
            services = {}
            for name, containers in raw.items():
                if not isinstance(containers, list):
                    raise ApiError(400, f"service {name!r} must list containers")
                services[name] = set(containers)
        draft = workspace.create_draft(label, services)
        return _json_response(draft.to_json(), status=201)

    @app.get("/api/drafts/{draft_id}")
    def get_draft(draft_id: str):
        return _json_response(workspace.get_draft(draft_id).to_json())

    @app.patch("/api/drafts/{draft_id}")
    async def patch_draft(draft_id: str, request: Request):
        body = await _read_body(request)
        operations = body.get("operations")
        if not isinstance(operations, list) or not operations:
            raise ApiError(400, "body needs a non-empty 'operations' list")
        expected = body.get("version")
        if expected is not None and not isinstance(expected, int):
            raise ApiError(400, "'version' must be an integer")
        draft = workspace.patch_draft(draft_id, operations, expected)
        return _json_response(draft.to_json())

    @app.post("/api/drafts/{draft_id}/evaluate")
    def evaluate_draft(draft_id: str):
        draft = workspace.get_draft(draft_id)
        decomposition = draft.to_decomposition()
        evaluation = evaluate_candidate(workspace.class_graph, decomposition, workspace.cfg)
        return _json_response(evaluation.to_json())

    @app.get("/api/compare")
    def compare_ids(ids: str | None = None):
        if ids:
            requested = [part for part in ids.split(",") if part]
        else:
            with workspace._lock:
                requested = sorted(workspace.drafts)
            if workspace.candidates is not None:
                shadowed = set(requested)
                requested = [
                    c.decomposition.id
                    for c in workspace.candidates.candidates
                    if c.decomposition.id not in shadowed
                ] + requested
        if not requested:
            raise ApiError(400, "nothing to compare: no ids given and no drafts or candidates loaded")
        evaluations = []
        for any_id in requested:
            resolved = workspace.find_decomposition(any_id)
            if resolved is None:
                raise ApiError(404, f"unknown draft or candidate {any_id!r}")
            decomposition, provenance = resolved
            evaluations.append(
                evaluate_candidate(
                    workspace.class_graph, decomposition, workspace.cfg, provenance=provenance
                )
            )
        flags = pareto_flags([e.summary.objective_vector for e in evaluations])
        payload = {
            "objectives": list(COMPARISON_OBJECTIVES),
            "note": COMPARISON_NOTE,
            "path_count": len(workspace.table.rows),
            "candidates": [
                {**e.to_json(), "pareto_optimal": flag} for e, flag in zip(evaluations, flags)
            ],
        }
        return _json_response(payload)

    @app.get("/api/selection")
    def get_selection():
        with workspace._lock:
            return _json_response({"id": workspace.selection})

    @app.put("/api/selection")
    async def put_selection(request: Request):
        body = await _read_body(request)
        if "id" not in body or not isinstance(body["id"], str):
            raise ApiError(400, "body needs a string 'id'")
        workspace.set_selection(body["id"])
        return _json_response({"id": body["id"]})

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


__all__ = ["ApiError", "Draft", "Workspace", "create_app"]
