"""The gated workflow engine.

Drives one design session over a workspace: plans the next prompt for the
current phase, sends it through the gateway, extracts file edits from the
response into the staging area, runs step-scoped audits, and pauses at a
human gate after every step. Approvals commit a snapshot and advance the
phase; rejections discard staged edits and schedule a repair prompt that
carries the review comment verbatim. Session state is rebuilt from the
append-only event journal, never cached on disk.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from . import phases
from .audit import AuditFinding, AuditReport, Corpus, audit
from .docmodel import (
    STEP_TITLES,
    DriverSet,
    IterationPlan,
    merge_driver_sets,
    parse_architecture_document,
    parse_drivers,
    parse_iteration_plan,
    parse_iteration_record,
    serialize_driver_set,
)
from .errors import EngineError, ParseError
from .gateway import Attachment, Gateway, ModelRequest, ModelResponse
from .phases import Phase
from .prompts import PromptLibrary, assemble_context
from .store import (
    ARCHITECTURE_DOC,
    DOMAIN_MODEL_DOC,
    DRIVERS_DOC,
    ITERATION_PLAN_DOC,
    PROCESS_DOC_NAME,
    Workspace,
    iteration_doc,
)

MAX_REPAIRS_PER_STEP = 2

_FENCE_OPEN_RE = re.compile(r"^(`{3,})\s*(\S*)\s*$")
_FILE_MARK_RE = re.compile(r"^file:\s*(\S+)\s*$")


def extract_edits(text: str) -> tuple[dict[str, str], str]:
    """Split a model response into file edits and commentary.

    An edit is a fenced block whose first line is ``file: <path>``; the
    rest of the block replaces that file whole. Everything else is
    commentary. Fences close on a run of backticks at least as long as
    the opener, so diagram fences nest safely inside 4-backtick edits.
    """
    edits: dict[str, str] = {}
    commentary: list[str] = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        m = _FENCE_OPEN_RE.match(lines[i])
        if not m:
            commentary.append(lines[i])
            i += 1
            continue
        fence = m.group(1)
        close_re = re.compile(rf"^`{{{len(fence)},}}\s*$")
        body: list[str] = []
        i += 1
        while i < len(lines) and not close_re.match(lines[i]):
            body.append(lines[i])
            i += 1
        i += 1  # past the closing fence (or EOF)
        if body and _FILE_MARK_RE.match(body[0]):
            path = _FILE_MARK_RE.match(body[0]).group(1)
            content = "\n".join(body[1:])
            if content and not content.endswith("\n"):
                content += "\n"
            edits[path] = content
        else:
            commentary.append(fence + (m.group(2) or ""))
            commentary.extend(body)
            commentary.append(fence)
    return edits, "\n".join(commentary).strip()


@dataclass
class PlannedAction:
    template_id: str
    bindings: dict[str, str] = field(default_factory=dict)
    context_items: list[tuple[str, str]] = field(default_factory=list)
    mandatory_items: int = 0
    kind: str = "initial"  # initial | repair | import-plan


@dataclass
class GateDecision:
    kind: str  # approve | reject_with_comment | edit_artifacts_then_approve | finish
    comment: str = ""
    timestamp: str = ""

    def __post_init__(self) -> None:
        if self.kind not in (
            "approve",
            "reject_with_comment",
            "edit_artifacts_then_approve",
            "finish",
        ):
            raise EngineError(f"unknown gate kind {self.kind!r}", code="UNKNOWN_GATE_KIND")
        if self.kind == "reject_with_comment" and not self.comment.strip():
            raise EngineError("a rejection needs a review comment", code="EMPTY_REJECT_COMMENT")


@dataclass
class StepOutcome:
    artifact_edits: dict[str, str] = field(default_factory=dict)
    extracted: dict[str, object] = field(default_factory=dict)
    audit: AuditReport = field(default_factory=AuditReport)
    needs_repair: bool = False
    staging_id: str | None = None
    commentary: str = ""


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


_STEP_TABLE_RULES = {4: "R-STEP4_TABLE", 5: "R-STEP5_TABLE"}

# audit rules worth running while a step's edits sit in staging
_STEP_SCOPED_RULES: dict[int, list[str]] = {
    2: ["R-UNKNOWN_DRIVER_REF"],
    3: [],
    4: ["R-STEP4_TABLE"],
    5: ["R-STEP5_TABLE", "R-DIAGRAM_SYNTAX"],
    6: ["R-DIAGRAM_SYNTAX", "R-UNKNOWN_DRIVER_REF"],
    7: [
        "R-ORPHAN_ELEMENT",
        "R-CONTAINER_STALE",
        "R-CONTEXT_ELEMENT_MISSING",
        "R-SCOPE_CREEP",
        "R-UNKNOWN_DRIVER_REF",
        "R-DIAGRAM_SYNTAX",
    ],
}


class Session:
    """One serialized design session over a workspace."""

    def __init__(
        self,
        workspace: Workspace,
        gateway: Gateway,
        *,
        library: PromptLibrary | None = None,
        clock: Callable[[], str] | None = None,
    ):
        self.workspace = workspace
        self.gateway = gateway
        self.library = library or PromptLibrary(workspace.root / workspace.config.prompts_dir)
        self.clock = clock or _utc_now
        self.phase: Phase = phases.REVIEW_DRIVERS
        self.mode = "ddd"
        self.import_plan = False
        self.awaiting_gate = False
        self.repair_count = 0
        self.pending_staging: str | None = None
        self.scheduled_feedback: str | None = None
        self.plan_imported = False
        self.gate_log: list[GateDecision] = []
        self.drivers: DriverSet | None = None
        self.plan: IterationPlan | None = None

    # -- construction ---------------------------------------------------------

    @classmethod
    def start(
        cls,
        workspace: Workspace,
        gateway: Gateway,
        *,
        mode: str | None = None,
        import_plan: bool = False,
        library: PromptLibrary | None = None,
        clock: Callable[[], str] | None = None,
    ) -> "Session":
        session = cls(workspace, gateway, library=library, clock=clock)
        session.mode = mode or workspace.config.domain_model_style
        if session.mode not in ("ddd", "plain"):
            raise EngineError(f"unknown mode {session.mode!r}", code="UNKNOWN_MODE")
        session.import_plan = import_plan
        text = workspace.read_artifact(DRIVERS_DOC)
        if text is None or not text.strip():
            raise EngineError(
                "the workspace has no drivers document to review", code="NO_DRIVERS_DOCUMENT"
            )
        try:
            parse_drivers(text)
        except ParseError as exc:
            raise EngineError(
                f"the drivers document does not parse: {exc}", code="NO_DRIVERS_DOCUMENT"
            ) from exc
        session.drivers = session._parse_all_drivers()
        if session._journal_path().exists() and session._journal_events():
            raise EngineError(
                "this workspace already has a session journal; load it instead",
                code="SESSION_EXISTS",
            )
        session._journal(
            "session-started", {"mode": session.mode, "import_plan": import_plan}
        )
        session._journal("phase-changed", {"phase": session.phase.token()})
        return session

    @classmethod
    def load(
        cls,
        workspace: Workspace,
        gateway: Gateway,
        *,
        library: PromptLibrary | None = None,
        clock: Callable[[], str] | None = None,
    ) -> "Session":
        session = cls(workspace, gateway, library=library, clock=clock)
        events = session._journal_events()
        if not events:
            raise EngineError("no session journal in this workspace", code="NO_SESSION")
        for event in events:
            session._replay_event(event)
        session.drivers = session._parse_all_drivers()
        if session._past_planning():
            session._load_plan()
        if (
            session.plan is None
            and session.phase == phases.ITERATION_PLANNING
            and session.pending_staging is not None
        ):
            staged = session.workspace.staged_edits(session.pending_staging)
            if ITERATION_PLAN_DOC in staged:
                try:
                    session.plan = parse_iteration_plan(staged[ITERATION_PLAN_DOC])
                except ParseError:
                    pass
        return session

    def _replay_event(self, event: dict) -> None:
        etype = event.get("type")
        payload = event.get("payload", {})
        if etype == "session-started":
            self.mode = payload.get("mode", "ddd")
            self.import_plan = bool(payload.get("import_plan"))
        elif etype == "phase-changed":
            self.phase = Phase.parse(payload["phase"])
        elif etype == "prompt-sent":
            if payload.get("kind") == "repair":
                self.repair_count += 1
            self.scheduled_feedback = None
        elif etype == "response-applied":
            self.awaiting_gate = True
            self.pending_staging = payload.get("staging_id")
            if payload.get("source") == "imported-plan":
                self.plan_imported = True
        elif etype == "response-discarded":
            self.awaiting_gate = False
            self.pending_staging = None
            if "feedback" in payload:
                self.scheduled_feedback = payload["feedback"]
        elif etype == "awaiting-gate":
            self.awaiting_gate = True
        elif etype == "gate-recorded":
            kind = payload.get("kind", "approve")
            self.gate_log.append(
                GateDecision(kind, payload.get("comment", ""), event.get("timestamp", ""))
            )
            self.awaiting_gate = False
            self.pending_staging = None
            self.repair_count = 0
            if kind == "reject_with_comment":
                self.scheduled_feedback = payload.get("comment", "")

    # -- journal ----------------------------------------------------------------

    def _journal_path(self) -> Path:
        return self.workspace.root / "journal" / "events.jsonl"

    def _journal_events(self) -> list[dict]:
        path = self._journal_path()
        if not path.is_file():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def _journal(self, etype: str, payload: dict) -> None:
        path = self._journal_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        record = {
            "type": etype,
            "timestamp": self.clock(),
            "phase": self.phase.token(),
            "payload": payload,
        }
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    # -- helpers ------------------------------------------------------------------

    def _parse_all_drivers(self) -> DriverSet | None:
        text = self.workspace.read_artifact(DRIVERS_DOC)
        if text is None:
            return None
        try:
            merged = parse_drivers(text)
        except ParseError:
            return None
        sets = [(DRIVERS_DOC, merged)]
        for name in self.workspace.list_artifacts():
            if name.startswith("Drivers/"):
                try:
                    sets.append((name, parse_drivers(self.workspace.read_artifact(name) or "")))
                except ParseError:
                    continue
        return merge_driver_sets(sets) if len(sets) > 1 else merged

    def _past_planning(self) -> bool:
        key = phases.phase_order_key(self.phase)
        return key > phases.phase_order_key(phases.ITERATION_PLANNING) or (
            self.phase == phases.ITERATION_PLANNING and self.awaiting_gate
        )

    def _load_plan(self) -> None:
        text = self.workspace.read_artifact(ITERATION_PLAN_DOC)
        if text is None:
            return
        try:
            self.plan = parse_iteration_plan(text)
        except ParseError:
            self.plan = None

    def plan_size(self) -> int:
        return len(self.plan.iterations) if self.plan else 1

    # -- next action -----------------------------------------------------------------

    def next_action(self) -> PlannedAction:
        if self.phase.finished:
            raise EngineError("the session is finished", code="SESSION_FINISHED")
        if self.awaiting_gate:
            raise EngineError("a gate decision is pending", code="AWAITING_GATE")
        if self.scheduled_feedback is not None:
            return PlannedAction(
                template_id="repair",
                bindings={"feedback": self.scheduled_feedback},
                context_items=self._context_items(),
                mandatory_items=self._mandatory_items(),
                kind="repair",
            )
        phase = self.phase
        if phase == phases.REVIEW_DRIVERS:
            template = "review-drivers"
        elif phase == phases.DOMAIN_MODEL:
            template = "domain-model-ddd" if self.mode == "ddd" else "domain-model-plain"
        elif phase == phases.ITERATION_PLANNING:
            if self.import_plan and self.workspace.read_artifact(ITERATION_PLAN_DOC):
                return PlannedAction(template_id="", kind="import-plan")
            template = "iteration-plan"
        elif phase == phases.SKELETON:
            template = "skeleton"
        elif phase.step == 2:
            return PlannedAction(
                template_id="iterate-start",
                bindings={"iteration": str(phase.iteration)},
                context_items=self._context_items(),
                mandatory_items=self._mandatory_items(),
            )
        else:
            return PlannedAction(
                template_id="step-advance",
                bindings={
                    "step": str(phase.step),
                    "step_title": STEP_TITLES[phase.step],
                    "iteration": str(phase.iteration),
                },
                context_items=self._context_items(),
                mandatory_items=self._mandatory_items(),
            )
        return PlannedAction(
            template_id=template,
            context_items=self._context_items(),
            mandatory_items=self._mandatory_items(),
        )

    def _context_items(self) -> list[tuple[str, str]]:
        """Bundle content in priority order; the tail is cut first."""
        ws = self.workspace
        items: list[tuple[str, str]] = []

        def add(name: str) -> None:
            text = ws.read_artifact(name)
            if text:
                items.append((name, text))

        if self.phase.is_iterating:
            add(iteration_doc(self.phase.iteration))
            add(ARCHITECTURE_DOC)
            items.extend(self._split_drivers_items())
            add(ITERATION_PLAN_DOC)
        elif self.phase == phases.SKELETON:
            add(ITERATION_PLAN_DOC)
            add(DRIVERS_DOC)
            add(DOMAIN_MODEL_DOC)
        elif self.phase == phases.ITERATION_PLANNING:
            add(DRIVERS_DOC)
            add(DOMAIN_MODEL_DOC)
        else:
            add(DRIVERS_DOC)
        return items

    def _split_drivers_items(self) -> list[tuple[str, str]]:
        """Drivers selected for the current iteration first, the rest after."""
        if self.drivers is None:
            text = self.workspace.read_artifact(DRIVERS_DOC)
            return [(DRIVERS_DOC, text)] if text else []
        goal_ids: set[str] = set()
        planned = self.plan.iteration(self.phase.iteration) if self.plan else None
        if planned is not None:
            goal_ids = set(planned.driver_refs)
        if not goal_ids:
            return [(DRIVERS_DOC, self.workspace.read_artifact(DRIVERS_DOC) or "")]
        chosen = DriverSet([d for d in self.drivers.drivers if d.id in goal_ids])
        rest = DriverSet([d for d in self.drivers.drivers if d.id not in goal_ids])
        items = [("drivers:iteration", serialize_driver_set(chosen))]
        if rest.drivers:
            items.append(("drivers:rest", serialize_driver_set(rest)))
        return items

    def _mandatory_items(self) -> int:
        if self.phase.is_iterating and self.workspace.read_artifact(
            iteration_doc(self.phase.iteration)
        ):
            return 1
        return 0

    # -- prompt / response cycle ---------------------------------------------------

    def build_request(self, action: PlannedAction) -> ModelRequest:
        persona = self.library.persona()
        process_path = self.workspace.root / PROCESS_DOC_NAME
        process = (
            process_path.read_text(encoding="utf-8")
            if process_path.is_file()
            else self.library.process_description()
        )
        bundle = assemble_context(
            persona=persona.raw,
            process_description=process,
            items=action.context_items,
            budget=self.workspace.config.context_budget,
            mandatory_items=action.mandatory_items,
        )
        attachments = [Attachment(PROCESS_DOC_NAME, bundle.process_description or "")]
        attachments += [Attachment.from_bundle_item(item) for item in bundle.items]
        return ModelRequest(
            system=bundle.persona,
            user=self.library.render(action.template_id, action.bindings),
            attachments=attachments,
            model_id=self.workspace.config.model_id,
            temperature=self.workspace.config.temperature,
        )

    def send_prompt(self, action: PlannedAction) -> ModelResponse:
        request = self.build_request(action)
        payload = {
            "template_id": action.template_id,
            "kind": action.kind,
            "digest": _digest(request.user),
        }
        if action.kind == "repair" and "feedback" in action.bindings:
            payload["feedback"] = action.bindings["feedback"]
        self._journal("prompt-sent", payload)
        self.scheduled_feedback = None
        if action.kind == "repair":
            self.repair_count += 1
        return self.gateway.complete(request)

    def _required_artifact(self) -> str | None:
        phase = self.phase
        if phase == phases.DOMAIN_MODEL:
            return DOMAIN_MODEL_DOC
        if phase == phases.ITERATION_PLANNING:
            return ITERATION_PLAN_DOC
        if phase == phases.SKELETON:
            return ARCHITECTURE_DOC
        if phase.is_iterating:
            return iteration_doc(phase.iteration)
        return None

    def apply_response(self, response: ModelResponse) -> StepOutcome:
        if self.phase.finished:
            raise EngineError("the session is finished", code="SESSION_FINISHED")
        if self.awaiting_gate:
            raise EngineError("a gate decision is pending", code="AWAITING_GATE")
        if response.finish_reason != "stop":
            raise EngineError(
                f"response did not complete (finish_reason={response.finish_reason})",
                code="TRUNCATED_RESPONSE",
            )
        edits, commentary = extract_edits(response.text)
        required = self._required_artifact()
        if required is not None and not edits:
            raise EngineError(
                f"the step must edit {required} but the response contains no "
                "file-edit blocks",
                code="NO_EDITS_FOUND",
            )
        outcome = StepOutcome(artifact_edits=edits, commentary=commentary)
        findings = self._inspect_edits(edits, outcome)
        repairable = [f for f in findings if f.repairable and f.severity == "error"]
        if repairable and self.repair_count < MAX_REPAIRS_PER_STEP:
            outcome.needs_repair = True
            outcome.audit.findings.extend(findings)
            self.scheduled_feedback = self._repair_feedback(repairable)
            self._journal(
                "response-discarded",
                {
                    "reason": "MALFORMED_STEP_OUTPUT",
                    "findings": [f.rule_id for f in repairable],
                    "feedback": self.scheduled_feedback,
                    "digest": _digest(response.text),
                },
            )
            return outcome
        staging_id = self.workspace.stage_edits(edits)
        outcome.staging_id = staging_id
        self.pending_staging = staging_id
        outcome.audit = self._staged_audit(findings)
        self._journal("audit-run", {
            "scope": outcome.audit.scope,
            "errors": len(outcome.audit.errors()),
            "findings": len(outcome.audit.findings),
        })
        self._journal(
            "response-applied",
            {
                "staging_id": staging_id,
                "artifacts": sorted(edits),
                "digest": _digest(response.text),
            },
        )
        self.awaiting_gate = True
        self._journal("awaiting-gate", {})
        return outcome

    def _repair_feedback(self, findings: list[AuditFinding]) -> str:
        lines = [f"- {f.message}" for f in findings]
        return "The last step's output is malformed:\n" + "\n".join(lines)

    def _inspect_edits(self, edits: Mapping[str, str], outcome: StepOutcome) -> list[AuditFinding]:
        """Parse step-relevant structures and flag repairable gaps."""
        findings: list[AuditFinding] = []
        phase = self.phase
        if phase == phases.ITERATION_PLANNING and ITERATION_PLAN_DOC in edits:
            try:
                plan = parse_iteration_plan(edits[ITERATION_PLAN_DOC])
                outcome.extracted["plan"] = plan
                self.plan = plan
            except ParseError as exc:
                findings.append(
                    AuditFinding(
                        "R-PLAN_TABLE",
                        "error",
                        f"the iteration plan is malformed: {exc}",
                        artifact=ITERATION_PLAN_DOC,
                        repairable=True,
                    )
                )
        if phase == phases.SKELETON and ARCHITECTURE_DOC in edits:
            outcome.extracted["architecture"] = parse_architecture_document(
                edits[ARCHITECTURE_DOC]
            )
        if phase.is_iterating:
            doc_name = iteration_doc(phase.iteration)
            record = None
            if doc_name in edits:
                record = parse_iteration_record(edits[doc_name])
                outcome.extracted["record"] = record
            if phase.step in _STEP_TABLE_RULES:
                table = None
                if record is not None:
                    table = (
                        record.concept_table if phase.step == 4 else record.instantiation_table
                    )
                key = "concept_table" if phase.step == 4 else "instantiation_table"
                outcome.extracted[key] = table or []
                if not table:
                    header = (
                        '"Selected design concept", "Rationale", "Discarded Alternatives"'
                        if phase.step == 4
                        else '"Instantiation decision", "Rationale"'
                    )
                    findings.append(
                        AuditFinding(
                            _STEP_TABLE_RULES[phase.step],
                            "error",
                            f"step {phase.step} must record its table with columns {header}",
                            artifact=doc_name,
                            repairable=True,
                        )
                    )
            if phase.step == 6:
                findings.extend(self._decisions_delta(edits))
        return findings

    def _decisions_delta(self, edits: Mapping[str, str]) -> list[AuditFinding]:
        def rows(text: str | None) -> int:
            if not text:
                return 0
            try:
                table = parse_architecture_document(text).decisions_table()
            except ParseError:
                return 0
            return len(table.rows) if table is not None else 0

        before = rows(self.workspace.read_artifact(ARCHITECTURE_DOC))
        after = rows(edits.get(ARCHITECTURE_DOC, self.workspace.read_artifact(ARCHITECTURE_DOC)))
        if after <= before:
            return [
                AuditFinding(
                    "R-MISSING_DECISIONS",
                    "error",
                    "step 6 added no design-decisions row to the architecture document",
                    artifact=ARCHITECTURE_DOC,
                    section="design-decisions",
                    repairable=True,
                )
            ]
        return []

    def _staged_audit(self, step_findings: list[AuditFinding]) -> AuditReport:
        """Step-scoped audit over the workspace with staged edits overlaid."""
        rules = _STEP_SCOPED_RULES.get(self.phase.step, []) if self.phase.is_iterating else []
        overlay = Corpus.load(self.workspace.root)
        if self.pending_staging is not None:
            staged = self.workspace.staged_edits(self.pending_staging)
            if ARCHITECTURE_DOC in staged:
                try:
                    overlay.architecture = parse_architecture_document(staged[ARCHITECTURE_DOC])
                except ParseError:
                    pass
            for name, text in staged.items():
                m = re.fullmatch(r"Design/Iteration(\d+)\.md", name)
                if m:
                    try:
                        record = parse_iteration_record(text)
                        overlay.iterations[record.iteration_number or int(m.group(1))] = record
                    except ParseError:
                        pass
        overlay.journal = None  # journal rules wait for the gate
        report = audit(
            overlay,
            rules=rules,
            severity_overrides=self.workspace.config.rule_severity,
            scope=f"step:{self.phase.token()}",
        )
        report.findings.extend(step_findings)
        return report

    # -- import shortcut -------------------------------------------------------------

    def apply_imported_plan(self) -> StepOutcome:
        if self.phase != phases.ITERATION_PLANNING:
            raise EngineError(
                "plans can only be imported during iteration planning",
                code="IMPORT_NOT_LEGAL_HERE",
            )
        text = self.workspace.read_artifact(ITERATION_PLAN_DOC)
        if text is None:
            raise EngineError("no iteration plan to import", code="NO_PLAN_TO_IMPORT")
        self.plan = parse_iteration_plan(text)
        staging_id = self.workspace.stage_edits({})
        self.pending_staging = staging_id
        self.plan_imported = True
        self._journal(
            "response-applied",
            {
                "staging_id": staging_id,
                "artifacts": [ITERATION_PLAN_DOC],
                "source": "imported-plan",
                "digest": _digest(text),
            },
        )
        self.awaiting_gate = True
        self._journal("awaiting-gate", {})
        return StepOutcome(
            artifact_edits={},
            extracted={"plan": self.plan},
            staging_id=staging_id,
            commentary="imported existing iteration plan",
        )

    # -- the gate -------------------------------------------------------------------

    def record_gate(
        self, decision: GateDecision, *, edits: Mapping[str, str] | None = None
    ) -> Phase:
        if not self.awaiting_gate:
            raise EngineError("no gate is pending", code="NOT_AWAITING_GATE")
        if not decision.timestamp:
            decision.timestamp = self.clock()
        if decision.kind == "finish" and not (
            self.phase.is_iterating and self.phase.step == phases.LAST_STEP
        ):
            raise EngineError(
                "finish is only legal at step 7 of an iteration", code="FINISH_NOT_LEGAL_HERE"
            )
        self.gate_log.append(decision)

        if decision.kind == "reject_with_comment":
            if self.pending_staging is not None:
                self.workspace.discard(self.pending_staging)
            self._journal(
                "gate-recorded", {"kind": decision.kind, "comment": decision.comment}
            )
            self._journal("response-discarded", {"reason": "REJECTED"})
            self.pending_staging = None
            self.awaiting_gate = False
            self.repair_count = 0
            self.scheduled_feedback = decision.comment
            return self.phase

        if decision.kind == "edit_artifacts_then_approve" and edits:
            merged = (
                self.workspace.staged_edits(self.pending_staging)
                if self.pending_staging is not None
                else {}
            )
            merged.update(edits)
            if self.pending_staging is not None:
                self.workspace.discard(self.pending_staging)
            self.pending_staging = self.workspace.stage_edits(merged)

        snapshot = None
        if self.pending_staging is not None:
            snapshot = self.workspace.commit(
                self.pending_staging,
                gate={
                    "kind": decision.kind,
                    "comment": decision.comment,
                    "phase": self.phase.token(),
                },
                clock=self.clock,
            )
        self._journal(
            "gate-recorded",
            {
                "kind": decision.kind,
                "comment": decision.comment,
                "snapshot": snapshot.id if snapshot else None,
            },
        )
        self.pending_staging = None
        self.awaiting_gate = False
        self.repair_count = 0

        if self.phase == phases.ITERATION_PLANNING:
            self._load_plan()
        if decision.kind == "finish":
            self.phase = phases.FINISHED
        else:
            self.phase = phases.next_phase(self.phase, self.plan_size())
        self._journal("phase-changed", {"phase": self.phase.token()})
        return self.phase

    # -- one full prompt-to-gate cycle ------------------------------------------------

    def advance(self) -> StepOutcome:
        """Plan, send and apply prompts until the session pauses at a gate.

        Malformed output is retried automatically within the repair
        budget; after that the engine stages what it got and forces the
        human gate.
        """
        action = self.next_action()
        if action.kind == "import-plan":
            return self.apply_imported_plan()
        response = self.send_prompt(action)
        outcome = self.apply_response(response)
        while outcome.needs_repair:
            action = self.next_action()
            response = self.send_prompt(action)
            outcome = self.apply_response(response)
        return outcome


def run_baseline(
    workspace: Workspace,
    gateway: Gateway,
    mode: str,
    *,
    library: PromptLibrary | None = None,
    clock: Callable[[], str] | None = None,
) -> str:
    """One-shot baseline: a single prompt, no process, no gates.

    Returns the architecture document produced by the model after
    committing it to the workspace.
    """
    from .prompts import BASELINE_MODES, baseline_prompt

    if mode not in BASELINE_MODES:
        raise EngineError(f"unknown baseline mode {mode!r}", code="UNKNOWN_BASELINE_MODE")
    library = library or PromptLibrary(workspace.root / workspace.config.prompts_dir)
    drivers = workspace.read_artifact(DRIVERS_DOC)
    if drivers is None or not drivers.strip():
        raise EngineError("the workspace has no drivers document", code="NO_DRIVERS_DOCUMENT")
    attachments = [Attachment(DRIVERS_DOC, drivers)]
    template_doc = library.baseline_template_doc(mode)
    if template_doc is not None:
        attachments.append(Attachment("Design/ArchitectureTemplate.md", template_doc))
    request = ModelRequest(
        system=library.persona().raw,
        user=baseline_prompt(library, mode),
        attachments=attachments,
        model_id=workspace.config.model_id,
        temperature=workspace.config.temperature,
    )
    response = gateway.complete(request)
    edits, _ = extract_edits(response.text)
    if ARCHITECTURE_DOC not in edits:
        raise EngineError(
            "the baseline response did not produce Design/Architecture.md",
            code="NO_EDITS_FOUND",
        )
    staging = workspace.stage_edits(edits)
    workspace.commit(staging, gate={"kind": "baseline", "mode": mode}, clock=clock)
    return edits[ARCHITECTURE_DOC]
