"""HTTP projection of a workspace session for the review console.

All state transitions go through POST /api/gate and POST /api/advance,
serialized by a per-app lock; every other route is a read-only view of
the journal and the committed snapshots.
"""

from __future__ import annotations

import json
import re
import threading
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import anyio

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .audit import AuditReport, Corpus, audit
from .docmodel import (
    parse_architecture_document,
    parse_drivers,
    parse_iteration_plan,
    parse_iteration_record,
)
from .engine import GateDecision, Session, StepOutcome
from .errors import AddflowError, EngineError, ParseError
from .gateway import Gateway, Transcript, Transport
from .store import (
    ARCHITECTURE_DOC,
    DRIVERS_DOC,
    ITERATION_PLAN_DOC,
    Workspace,
    is_legal_artifact,
)

DEFAULT_PORT = 7843

_CONFLICT_CODES = {
    "AWAITING_GATE",
    "NOT_AWAITING_GATE",
    "SESSION_FINISHED",
    "SESSION_EXISTS",
    "FINISH_NOT_LEGAL_HERE",
    "IMPORT_NOT_LEGAL_HERE",
    "NO_SESSION",
}
_BAD_REQUEST_CODES = {
    "UNKNOWN_GATE_KIND",
    "EMPTY_REJECT_COMMENT",
    "UNKNOWN_MODE",
    "ILLEGAL_PATH",
    "NO_PLAN_TO_IMPORT",
    "INVALID_CONFIG",
}
_NOT_FOUND_CODES = {"UNKNOWN_SNAPSHOT", "UNKNOWN_STAGING", "NO_WORKSPACE"}


def _status_for(code: str) -> int:
    if code in _CONFLICT_CODES:
        return 409
    if code in _BAD_REQUEST_CODES:
        return 400
    if code in _NOT_FOUND_CODES:
        return 404
    return 500


class GateBody(BaseModel):
    kind: str
    comment: str = ""
    edits: dict[str, str] | None = None


@dataclass
class _AppState:
    workspace: Workspace
    transport: Transport | None = None
    clock: Callable[[], str] | None = None
    session: Session | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    closing: bool = False

    def gateway(self) -> Gateway:
        kwargs = {}
        if self.transport is not None:
            kwargs["transport"] = self.transport
        if self.clock is not None:
            kwargs["clock"] = self.clock
        return Gateway(
            transcript=Transcript(self.workspace.root / "journal" / "transcript.jsonl"),
            **kwargs,
        )

    def load_session(self, *, create: bool = False) -> Session | None:
        if self.session is None:
            try:
                self.session = Session.load(
                    self.workspace, self.gateway(), clock=self.clock
                )
            except EngineError as exc:
                if exc.code != "NO_SESSION":
                    raise
                if create:
                    self.session = Session.start(
                        self.workspace, self.gateway(), clock=self.clock
                    )
        return self.session


def _summary(state: _AppState) -> dict:
    ws = state.workspace
    base = {
        "phase": None,
        "display": None,
        "iteration": None,
        "step": None,
        "finished": False,
        "awaiting_gate": False,
        "repair_count": 0,
        "mode": None,
        "plan_size": None,
        "snapshot": ws.current_snapshot_id(),
        "pending": None,
    }
    session = state.session
    if session is None:
        return base
    pending = None
    if session.pending_staging is not None:
        pending = {
            "staging_id": session.pending_staging,
            "artifacts": sorted(ws.staged_edits(session.pending_staging)),
        }
    base.update(
        phase=session.phase.token(),
        display=str(session.phase),
        iteration=session.phase.iteration or None,
        step=session.phase.step or None,
        finished=session.phase.finished,
        awaiting_gate=session.awaiting_gate,
        repair_count=session.repair_count,
        mode=session.mode,
        plan_size=len(session.plan.iterations) if session.plan is not None else None,
        pending=pending,
    )
    return base


_PARSERS: dict[str, Callable] = {
    DRIVERS_DOC: parse_drivers,
    ITERATION_PLAN_DOC: parse_iteration_plan,
    ARCHITECTURE_DOC: parse_architecture_document,
}


def _parse_warnings(name: str, content: str) -> list[dict]:
    parser = _PARSERS.get(name)
    if parser is None:
        if re.fullmatch(r"Design/Iteration[1-9]\d*\.md", name):
            parser = parse_iteration_record
        elif name.startswith("Drivers/"):
            parser = parse_drivers
        else:
            return []
    try:
        parsed = parser(content)
    except ParseError as exc:
        return [{"code": exc.code, "message": str(exc), "severity": "error", "location": None}]
    return [
        {
            "code": w.code,
            "message": w.message,
            "severity": w.severity,
            "location": w.location,
        }
        for w in getattr(parsed, "warnings", [])
    ]


def _outcome_dict(outcome: StepOutcome) -> dict:
    report: AuditReport = outcome.audit
    return {
        "staging_id": outcome.staging_id,
        "artifacts": sorted(outcome.artifact_edits),
        "commentary": outcome.commentary,
        "needs_repair": outcome.needs_repair,
        "findings": report.to_dict()["findings"],
    }


_API_EVENT_KINDS = {"audit-run": "audit-completed"}


def _api_event(seq: int, envelope: dict) -> dict:
    kind = envelope.get("type", "")
    return {
        "seq": seq,
        "kind": _API_EVENT_KINDS.get(kind, kind),
        "phase": envelope.get("phase"),
        "timestamp": envelope.get("timestamp"),
        "payload": envelope.get("payload", {}),
    }


def _sse_frame(event: dict) -> str:
    data = json.dumps(event, ensure_ascii=False)
    return f"id: {event['seq']}\nevent: {event['kind']}\ndata: {data}\n\n"


def create_app(
    root: Path | str,
    *,
    transport: Transport | None = None,
    clock: Callable[[], str] | None = None,
) -> FastAPI:
    workspace = Workspace.open(Path(root))
    state = _AppState(workspace=workspace, transport=transport, clock=clock)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        state.closing = True

    app = FastAPI(title="addflow", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.addflow = state

    @app.exception_handler(AddflowError)
    async def _addflow_error(_request: Request, exc: AddflowError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc.code),
            content={"code": exc.code, "message": str(exc)},
        )

    @app.get("/api/session")
    def get_session():
        state.load_session()
        return _summary(state)

    @app.get("/api/artifacts/{name:path}/diff")
    def get_diff(
        name: str,
        from_snapshot: int = Query(alias="from"),
        to_snapshot: int = Query(alias="to"),
    ):
        diff = workspace.diff(from_snapshot, to_snapshot, name)
        return {
            "artifact": diff.artifact,
            "from": diff.from_snapshot,
            "to": diff.to_snapshot,
            "empty": diff.empty,
            "hunks": [
                {
                    "old_start": h.old_start,
                    "new_start": h.new_start,
                    "old_lines": h.old_lines,
                    "new_lines": h.new_lines,
                    "section": h.section,
                }
                for h in diff.hunks
            ],
        }

    @app.get("/api/artifacts/{name:path}")
    def get_artifact(name: str, staged: bool = False):
        if not is_legal_artifact(name):
            return JSONResponse(
                status_code=404,
                content={"code": "NOT_FOUND", "message": f"{name} is not a workspace artifact"},
            )
        content = workspace.read_artifact(name)
        from_staging = False
        if staged:
            state.load_session()
            session = state.session
            if session is not None and session.pending_staging is not None:
                staged_files = workspace.staged_edits(session.pending_staging)
                if name in staged_files:
                    content = staged_files[name]
                    from_staging = True
        if content is None:
            return JSONResponse(
                status_code=404,
                content={"code": "NOT_FOUND", "message": f"{name} does not exist"},
            )
        return {
            "name": name,
            "content": content,
            "staged": from_staging,
            "warnings": _parse_warnings(name, content),
        }

    @app.get("/api/audit")
    def get_audit():
        corpus = Corpus.load(workspace.root)
        report = audit(corpus, severity_overrides=workspace.config.rule_severity)
        payload = report.to_dict()
        payload["exit_code"] = report.exit_code
        payload["load_issues"] = corpus.load_issues
        return payload

    @app.post("/api/gate")
    def post_gate(body: GateBody):
        with state.lock:
            session = state.load_session()
            if session is None:
                raise EngineError("no session to gate", code="NO_SESSION")
            decision = GateDecision(body.kind, body.comment)
            session.record_gate(decision, edits=body.edits)
            return _summary(state)

    @app.post("/api/advance")
    def post_advance():
        with state.lock:
            session = state.load_session(create=True)
            outcome = session.advance()
            return {"session": _summary(state), "outcome": _outcome_dict(outcome)}

    @app.get("/api/events")
    async def get_events(
        request: Request,
        from_seq: int = Query(default=1, alias="from"),
        follow: bool = True,
    ):
        last_id = request.headers.get("last-event-id")
        if last_id and last_id.isdigit():
            from_seq = max(from_seq, int(last_id) + 1)
        journal = workspace.root / "journal" / "events.jsonl"

        def journal_lines() -> list[str]:
            if not journal.is_file():
                return []
            return [
                line
                for line in journal.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]

        async def stream():
            emitted = 0
            idle = 0
            yield "retry: 2000\n\n"
            while not state.closing:
                lines = journal_lines()
                for i in range(emitted, len(lines)):
                    seq = i + 1
                    if seq < from_seq:
                        continue
                    try:
                        envelope = json.loads(lines[i])
                    except json.JSONDecodeError:
                        continue
                    yield _sse_frame(_api_event(seq, envelope))
                    idle = 0
                emitted = len(lines)
                if not follow:
                    return
                if await request.is_disconnected():
                    return
                idle += 1
                if idle >= 40:  # a comment frame every ~10s keeps proxies open
                    yield ": keep-alive\n\n"
                    idle = 0
                await anyio.sleep(0.25)

        return StreamingResponse(
            stream(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app
