"""Cross-artifact consistency rules and driver traceability.

The auditor never mutates anything: it loads a corpus (documents plus an
optional session journal), evaluates every applicable rule, and reports
findings. Rules whose inputs are missing are listed as skipped rather
than silently passing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .docmodel import (
    ArchitectureDocument,
    DiagramKind,
    DriverSet,
    IterationPlan,
    IterationRecord,
    SectionKind,
    extract_driver_ids,
    merge_driver_sets,
    parse_architecture_document,
    parse_drivers,
    parse_iteration_plan,
    parse_iteration_record,
)
from .errors import ParseError

_SEVERITIES = ("error", "warning", "info")

# rule id -> (default severity, repairable, inputs the rule needs)
RULES: dict[str, tuple[str, bool, tuple[str, ...]]] = {
    "R-ORPHAN_ELEMENT": ("error", False, ("architecture",)),
    "R-ARCH_DOC_UNTOUCHED": ("error", True, ("journal", "snapshots")),
    "R-CONTAINER_STALE": ("error", False, ("architecture",)),
    "R-MISSING_DECISIONS": ("error", True, ("architecture", "iterations")),
    "R-SCOPE_CREEP": ("warning", False, ("architecture",)),
    "R-STEP4_TABLE": ("error", True, ("iterations",)),
    "R-STEP5_TABLE": ("error", True, ("iterations",)),
    "R-PLAN_COVERAGE": ("warning", False, ("drivers", "plan")),
    "R-CONTEXT_ELEMENT_MISSING": ("warning", False, ("architecture",)),
    "R-UNKNOWN_DRIVER_REF": ("error", False, ("drivers",)),
    "R-DIAGRAM_SYNTAX": ("warning", False, ("architecture",)),
    "R-GATE_VIOLATION": ("error", False, ("journal",)),
    "R-UNBOUND_SEQUENCE": ("info", False, ("architecture",)),
}

_INPUT_LABELS = {
    "drivers": "no drivers document",
    "plan": "no iteration plan",
    "architecture": "no architecture document",
    "iterations": "no iteration records",
    "journal": "no session journal",
    "snapshots": "no snapshots",
}


@dataclass
class AuditFinding:
    rule_id: str
    severity: str
    message: str
    artifact: str = ""
    section: str = ""
    element: str = ""
    repairable: bool = False

    def location(self) -> str:
        return ":".join(p for p in (self.artifact, self.section, self.element) if p)


@dataclass
class AuditReport:
    findings: list[AuditFinding] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    scope: str = "all"

    def by_rule(self, rule_id: str) -> list[AuditFinding]:
        return [f for f in self.findings if f.rule_id == rule_id]

    def errors(self) -> list[AuditFinding]:
        return [f for f in self.findings if f.severity == "error"]

    def repairable_errors(self) -> list[AuditFinding]:
        return [f for f in self.errors() if f.repairable]

    @property
    def exit_code(self) -> int:
        return 1 if self.errors() else 0

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "findings": [
                {
                    "rule": f.rule_id,
                    "severity": f.severity,
                    "message": f.message,
                    "artifact": f.artifact,
                    "section": f.section,
                    "element": f.element,
                    "repairable": f.repairable,
                }
                for f in self.findings
            ],
            "skipped": [{"rule": r, "reason": why} for r, why in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def to_text(self) -> str:
        lines: list[str] = []
        if not self.findings:
            lines.append("No findings.")
        for f in self.findings:
            loc = f" ({f.location()})" if f.location() else ""
            lines.append(f"{f.severity.upper():7s} {f.rule_id}: {f.message}{loc}")
        for rule_id, reason in self.skipped:
            lines.append(f"skipped {rule_id}: {reason}")
        return "\n".join(lines)


@dataclass
class DriverTrace:
    planned_in: list[int] = field(default_factory=list)
    decided_in: list[int] = field(default_factory=list)
    sequenced_in: list[str] = field(default_factory=list)


@dataclass
class TraceMatrix:
    entries: dict[str, DriverTrace] = field(default_factory=dict)


@dataclass
class Corpus:
    drivers: DriverSet | None = None
    plan: IterationPlan | None = None
    architecture: ArchitectureDocument | None = None
    iterations: dict[int, IterationRecord] = field(default_factory=dict)
    journal: list[dict] | None = None
    root: Path | None = None
    load_issues: list[str] = field(default_factory=list)

    @classmethod
    def load(cls, root: Path) -> "Corpus":
        root = Path(root)
        corpus = cls(root=root)

        def note(artifact: str, exc: Exception) -> None:
            corpus.load_issues.append(f"{artifact}: {exc}")

        drivers_path = root / "ArchitecturalDrivers.md"
        if drivers_path.is_file():
            try:
                parsed = parse_drivers(drivers_path.read_text(encoding="utf-8"))
                extra_dir = root / "Drivers"
                sets = [("ArchitecturalDrivers.md", parsed)]
                if extra_dir.is_dir():
                    for p in sorted(extra_dir.glob("*.md")):
                        sets.append(
                            (f"Drivers/{p.name}", parse_drivers(p.read_text(encoding="utf-8")))
                        )
                corpus.drivers = merge_driver_sets(sets) if len(sets) > 1 else parsed
            except ParseError as exc:
                note("ArchitecturalDrivers.md", exc)
        plan_path = root / "Design" / "IterationPlan.md"
        if plan_path.is_file():
            try:
                corpus.plan = parse_iteration_plan(plan_path.read_text(encoding="utf-8"))
            except ParseError as exc:
                note("Design/IterationPlan.md", exc)
        arch_path = root / "Design" / "Architecture.md"
        if arch_path.is_file():
            try:
                corpus.architecture = parse_architecture_document(
                    arch_path.read_text(encoding="utf-8")
                )
            except ParseError as exc:
                note("Design/Architecture.md", exc)
        design = root / "Design"
        if design.is_dir():
            for p in sorted(design.iterdir()):
                m = re.fullmatch(r"Iteration([1-9]\d*)\.md", p.name)
                if not m:
                    continue
                try:
                    record = parse_iteration_record(p.read_text(encoding="utf-8"))
                except ParseError as exc:
                    note(p.name, exc)
                    continue
                number = record.iteration_number or int(m.group(1))
                corpus.iterations[number] = record
        journal_path = root / "journal" / "events.jsonl"
        if journal_path.is_file():
            events = []
            for i, line in enumerate(journal_path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    events.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    note(f"journal/events.jsonl line {i}", exc)
            corpus.journal = events
        return corpus

    # -- derived views -------------------------------------------------------

    def has_snapshots(self) -> bool:
        return self.root is not None and (self.root / "journal" / "snapshots").is_dir()

    def snapshot_text(self, snapshot_id: int, artifact: str) -> str | None:
        if self.root is None:
            return None
        path = self.root / "journal" / "snapshots" / f"{snapshot_id:04d}" / "files" / artifact
        return path.read_text(encoding="utf-8") if path.is_file() else None

    def completed_iterations(self) -> dict[int, IterationRecord]:
        """Iterations that finished step 7.

        With a journal, completion means an approve gate at step 7; on a
        bare document corpus the iteration's analysis text decides.
        """
        if self.journal is not None:
            done = set()
            for event in self.journal:
                if event.get("type") != "gate-recorded":
                    continue
                if event.get("payload", {}).get("kind") not in ("approve", "edit_artifacts_then_approve", "finish"):
                    continue
                phase = event.get("phase", "")
                m = re.fullmatch(r"iterating:(\d+):7", phase)
                if m:
                    done.add(int(m.group(1)))
            return {n: r for n, r in self.iterations.items() if n in done}
        return {n: r for n, r in self.iterations.items() if r.completed}


def _norm(name: str) -> str:
    return name.strip().casefold()


def _diagram_names(diagrams) -> set[str]:
    names: set[str] = set()
    for d in diagrams:
        names.update(_norm(n) for n in d.names())
    return names


def _structural_names(arch: ArchitectureDocument) -> set[str]:
    names: set[str] = set()
    for kind in (SectionKind.CONTAINER_DIAGRAM, SectionKind.COMPONENT_DIAGRAMS):
        section = arch.section(kind)
        if section is not None:
            names |= _diagram_names(section.all_diagrams())
    return names


def _sequence_carriers(arch: ArchitectureDocument):
    """(heading or None, diagram) pairs for every sequence-section diagram."""
    section = arch.section(SectionKind.SEQUENCE_DIAGRAMS)
    if section is None:
        return
    for d in section.diagrams:
        yield None, d
    for sub in section.subsections:
        for d in sub.diagrams:
            yield sub.heading, d


# -- rule bodies -------------------------------------------------------------


def _rule_orphan_element(corpus: Corpus, out: list[AuditFinding]) -> None:
    arch = corpus.architecture
    structural = _structural_names(arch)
    seen: set[str] = set()
    for heading, diagram in _sequence_carriers(arch):
        if diagram.kind != DiagramKind.SEQUENCE:
            continue
        for node in diagram.nodes:
            if _norm(node.id) in structural or _norm(node.label) in structural:
                continue
            display = node.label or node.id
            if _norm(display) in seen:
                continue
            seen.add(_norm(display))
            out.append(
                AuditFinding(
                    "R-ORPHAN_ELEMENT",
                    "error",
                    f"{display} participates in a sequence diagram but appears in no "
                    "container or component diagram",
                    artifact="Design/Architecture.md",
                    section=heading or SectionKind.SEQUENCE_DIAGRAMS.value,
                    element=display,
                )
            )


def _rule_container_stale(corpus: Corpus, out: list[AuditFinding]) -> None:
    arch = corpus.architecture
    container_section = arch.section(SectionKind.CONTAINER_DIAGRAM)
    component_section = arch.section(SectionKind.COMPONENT_DIAGRAMS)
    if container_section is None or component_section is None:
        return
    container_names = _diagram_names(container_section.all_diagrams())
    for sub in component_section.subsections:
        if not sub.diagrams:
            continue
        if _norm(sub.heading) not in container_names:
            out.append(
                AuditFinding(
                    "R-CONTAINER_STALE",
                    "error",
                    f"component diagram details {sub.heading!r}, which is not in the "
                    "container diagram",
                    artifact="Design/Architecture.md",
                    section=SectionKind.COMPONENT_DIAGRAMS.value,
                    element=sub.heading,
                )
            )


def _rule_context_element_missing(corpus: Corpus, out: list[AuditFinding]) -> None:
    arch = corpus.architecture
    context_section = arch.section(SectionKind.CONTEXT_DIAGRAM)
    container_section = arch.section(SectionKind.CONTAINER_DIAGRAM)
    if context_section is None or container_section is None:
        return
    container_names = _diagram_names(container_section.all_diagrams())
    seen: set[str] = set()
    for diagram in context_section.all_diagrams():
        for node in diagram.nodes:
            if _norm(node.id) in container_names or _norm(node.label) in container_names:
                continue
            display = node.label or node.id
            if _norm(display) in seen:
                continue
            seen.add(_norm(display))
            out.append(
                AuditFinding(
                    "R-CONTEXT_ELEMENT_MISSING",
                    "warning",
                    f"{display} appears in the context diagram but not in the container diagram",
                    artifact="Design/Architecture.md",
                    section=SectionKind.CONTEXT_DIAGRAM.value,
                    element=display,
                )
            )


def _rule_scope_creep(corpus: Corpus, out: list[AuditFinding]) -> None:
    goal_union: set[str] = set()
    for record in corpus.completed_iterations().values():
        goal_union.update(record.goal_drivers)
    for heading, _diagram in _sequence_carriers(corpus.architecture):
        if heading is None:
            continue
        for driver_id in extract_driver_ids(heading):
            if driver_id in goal_union:
                continue
            out.append(
                AuditFinding(
                    "R-SCOPE_CREEP",
                    "warning",
                    f"sequence diagram {heading!r} addresses {driver_id}, which no "
                    "completed iteration selected",
                    artifact="Design/Architecture.md",
                    section=heading,
                    element=driver_id,
                )
            )


def _rule_unbound_sequence(corpus: Corpus, out: list[AuditFinding]) -> None:
    for heading, _diagram in _sequence_carriers(corpus.architecture):
        if heading is not None and extract_driver_ids(heading):
            continue
        label = heading or "(top of section)"
        out.append(
            AuditFinding(
                "R-UNBOUND_SEQUENCE",
                "info",
                f"sequence diagram under {label!r} names no driver",
                artifact="Design/Architecture.md",
                section=SectionKind.SEQUENCE_DIAGRAMS.value,
                element=label,
            )
        )


def _rule_step_tables(corpus: Corpus, out: list[AuditFinding]) -> None:
    for number in sorted(corpus.completed_iterations()):
        record = corpus.iterations[number]
        artifact = f"Design/Iteration{number}.md"
        if not record.concept_table:
            out.append(
                AuditFinding(
                    "R-STEP4_TABLE",
                    "error",
                    f"iteration {number} records no design-concept table "
                    '(columns "Selected design concept", "Rationale", "Discarded Alternatives")',
                    artifact=artifact,
                    repairable=True,
                )
            )
        if not record.instantiation_table:
            out.append(
                AuditFinding(
                    "R-STEP5_TABLE",
                    "error",
                    f"iteration {number} records no instantiation-decision table "
                    '(columns "Instantiation decision", "Rationale")',
                    artifact=artifact,
                    repairable=True,
                )
            )


def _decision_rows(arch: ArchitectureDocument) -> list[list[str]]:
    table = arch.decisions_table()
    return table.rows if table is not None else []


def _rule_missing_decisions(corpus: Corpus, out: list[AuditFinding]) -> None:
    completed = corpus.completed_iterations()
    if corpus.journal is not None and corpus.has_snapshots():
        gates: dict[str, int] = {}
        order: list[tuple[str, int]] = []
        for event in corpus.journal:
            if event.get("type") != "gate-recorded":
                continue
            snapshot = event.get("payload", {}).get("snapshot")
            if snapshot is None:
                continue
            gates[event.get("phase", "")] = snapshot
            order.append((event.get("phase", ""), snapshot))
        for number in sorted(completed):
            end = gates.get(f"iterating:{number}:7")
            if end is None:
                continue
            start = 0
            for phase, snapshot in order:
                if phase == f"iterating:{number}:7" and snapshot == end:
                    break
                if not phase.startswith(f"iterating:{number}:"):
                    start = snapshot
            rows_before = _count_decision_rows(corpus, start)
            rows_after = _count_decision_rows(corpus, end)
            if rows_after is not None and rows_before is not None and rows_after <= rows_before:
                out.append(_missing_decisions_finding(number))
        return
    rows = _decision_rows(corpus.architecture)
    cited: set[str] = set()
    for row in rows:
        if row:
            cited.update(extract_driver_ids(row[0]))
    for number in sorted(completed):
        goals = set(completed[number].goal_drivers)
        if goals and not (goals & cited):
            out.append(_missing_decisions_finding(number))


def _missing_decisions_finding(number: int) -> AuditFinding:
    return AuditFinding(
        "R-MISSING_DECISIONS",
        "error",
        f"iteration {number} completed without adding a design-decisions row",
        artifact="Design/Architecture.md",
        section=SectionKind.DESIGN_DECISIONS.value,
        element=f"iteration {number}",
        repairable=True,
    )


def _count_decision_rows(corpus: Corpus, snapshot_id: int) -> int | None:
    text = corpus.snapshot_text(snapshot_id, "Design/Architecture.md")
    if text is None:
        return 0
    try:
        return len(_decision_rows(parse_architecture_document(text)))
    except ParseError:
        return None


def _rule_arch_doc_untouched(corpus: Corpus, out: list[AuditFinding]) -> None:
    gates: dict[str, int] = {}
    for event in corpus.journal or []:
        if event.get("type") != "gate-recorded":
            continue
        snapshot = event.get("payload", {}).get("snapshot")
        if snapshot is not None:
            gates[event.get("phase", "")] = snapshot
    numbers = sorted(
        {int(m.group(1)) for g in gates if (m := re.fullmatch(r"iterating:(\d+):\d", g))}
    )
    for number in numbers:
        start = gates.get(f"iterating:{number}:4")
        end = gates.get(f"iterating:{number}:6")
        if start is None or end is None:
            continue
        before = _snapshot_digest(corpus, start, "Design/Architecture.md")
        after = _snapshot_digest(corpus, end, "Design/Architecture.md")
        if before == after:
            out.append(
                AuditFinding(
                    "R-ARCH_DOC_UNTOUCHED",
                    "error",
                    f"iteration {number} finished steps 5 and 6 without changing "
                    "the architecture document",
                    artifact="Design/Architecture.md",
                    element=f"iteration {number}",
                    repairable=True,
                )
            )


def _snapshot_digest(corpus: Corpus, snapshot_id: int, artifact: str) -> str | None:
    if corpus.root is None:
        return None
    manifest = (
        corpus.root / "journal" / "snapshots" / f"{snapshot_id:04d}" / "manifest.json"
    )
    if not manifest.is_file():
        return None
    data = json.loads(manifest.read_text(encoding="utf-8"))
    return data.get("digests", {}).get(artifact)


def _rule_plan_coverage(corpus: Corpus, out: list[AuditFinding]) -> None:
    planned = set(corpus.plan.all_refs())
    for driver in corpus.drivers.primaries():
        if driver.id in planned:
            continue
        out.append(
            AuditFinding(
                "R-PLAN_COVERAGE",
                "warning",
                f"primary driver {driver.id} appears in no planned iteration",
                artifact="Design/IterationPlan.md",
                element=driver.id,
            )
        )


def _rule_unknown_driver_ref(corpus: Corpus, out: list[AuditFinding]) -> None:
    known = corpus.drivers.ids()

    def check(ids, artifact: str, where: str) -> None:
        for driver_id in ids:
            if driver_id in known:
                continue
            out.append(
                AuditFinding(
                    "R-UNKNOWN_DRIVER_REF",
                    "error",
                    f"{where} references undeclared driver {driver_id}",
                    artifact=artifact,
                    element=driver_id,
                )
            )

    if corpus.plan is not None:
        for it in corpus.plan.iterations:
            check(it.driver_refs, "Design/IterationPlan.md", f"plan iteration {it.number}")
    if corpus.architecture is not None:
        for i, row in enumerate(_decision_rows(corpus.architecture), 1):
            if row:
                check(
                    extract_driver_ids(row[0]),
                    "Design/Architecture.md",
                    f"design-decisions row {i}",
                )


def _rule_diagram_syntax(corpus: Corpus, out: list[AuditFinding]) -> None:
    for issue in corpus.architecture.warnings:
        if issue.code != "DIAGRAM_SYNTAX":
            continue
        out.append(
            AuditFinding(
                "R-DIAGRAM_SYNTAX",
                "warning",
                issue.message,
                artifact="Design/Architecture.md",
                section=issue.location or "",
            )
        )


def check_gate_rule(events: list[dict]) -> list[int]:
    """Indices (1-based) of response-applied events that broke the gate rule.

    A staged response must be reviewed before the next one lands: an
    approve or edit-approve gate clears the way, and a discard (reject
    rework, or the engine retracting malformed output) revokes the
    pending response.
    """
    violations: list[int] = []
    pending = False
    for i, event in enumerate(events, 1):
        etype = event.get("type")
        if etype == "response-applied":
            if pending:
                violations.append(i)
            pending = True
        elif etype == "response-discarded":
            pending = False
        elif etype == "gate-recorded":
            kind = event.get("payload", {}).get("kind")
            if kind in ("approve", "edit_artifacts_then_approve", "finish"):
                pending = False
    return violations


def _rule_gate_violation(corpus: Corpus, out: list[AuditFinding]) -> None:
    for index in check_gate_rule(corpus.journal or []):
        out.append(
            AuditFinding(
                "R-GATE_VIOLATION",
                "error",
                f"journal event {index} applied a second response without an "
                "intervening approve gate",
                artifact="journal/events.jsonl",
                element=f"event {index}",
            )
        )


_RULE_BODIES = {
    "R-ORPHAN_ELEMENT": _rule_orphan_element,
    "R-ARCH_DOC_UNTOUCHED": _rule_arch_doc_untouched,
    "R-CONTAINER_STALE": _rule_container_stale,
    "R-MISSING_DECISIONS": _rule_missing_decisions,
    "R-SCOPE_CREEP": _rule_scope_creep,
    "R-STEP4_TABLE": _rule_step_tables,
    "R-STEP5_TABLE": _rule_step_tables,
    "R-PLAN_COVERAGE": _rule_plan_coverage,
    "R-CONTEXT_ELEMENT_MISSING": _rule_context_element_missing,
    "R-UNKNOWN_DRIVER_REF": _rule_unknown_driver_ref,
    "R-DIAGRAM_SYNTAX": _rule_diagram_syntax,
    "R-GATE_VIOLATION": _rule_gate_violation,
    "R-UNBOUND_SEQUENCE": _rule_unbound_sequence,
}


def _input_missing(corpus: Corpus, requirement: str) -> bool:
    if requirement == "drivers":
        return corpus.drivers is None
    if requirement == "plan":
        return corpus.plan is None
    if requirement == "architecture":
        return corpus.architecture is None
    if requirement == "iterations":
        return not corpus.iterations
    if requirement == "journal":
        return corpus.journal is None
    if requirement == "snapshots":
        return not corpus.has_snapshots()
    raise ValueError(requirement)


def audit(
    corpus: Corpus,
    *,
    rules: list[str] | None = None,
    severity_overrides: dict[str, str] | None = None,
    scope: str = "all",
) -> AuditReport:
    """Evaluate the rule registry over the corpus. Total: never raises."""
    overrides = severity_overrides or {}
    selected = list(RULES) if rules is None else rules
    report = AuditReport(scope=scope)
    raw: list[AuditFinding] = []
    ran: set = set()
    for rule_id in selected:
        if rule_id not in RULES:
            raise ValueError(f"unknown audit rule {rule_id!r}")
        default_severity, repairable, needs = RULES[rule_id]
        missing = [r for r in needs if _input_missing(corpus, r)]
        if missing:
            report.skipped.append((rule_id, ", ".join(_INPUT_LABELS[m] for m in missing)))
            continue
        body = _RULE_BODIES[rule_id]
        if body in ran:
            continue
        ran.add(body)
        body(corpus, raw)
    wanted = set(selected)
    for finding in raw:
        if finding.rule_id not in wanted:
            continue
        finding.severity = overrides.get(finding.rule_id, finding.severity)
        if finding.severity not in _SEVERITIES:
            finding.severity = RULES[finding.rule_id][0]
        report.findings.append(finding)
    rank = {s: i for i, s in enumerate(_SEVERITIES)}
    report.findings.sort(
        key=lambda f: (rank[f.severity], f.artifact, f.section, f.element, f.message)
    )
    return report


def trace(corpus: Corpus) -> TraceMatrix:
    """Where every declared driver is planned, decided and sequenced."""
    if corpus.drivers is None:
        return TraceMatrix()
    matrix = TraceMatrix({d.id: DriverTrace() for d in corpus.drivers.drivers})
    if corpus.plan is not None:
        for it in corpus.plan.iterations:
            for ref in it.driver_refs:
                if ref in matrix.entries:
                    matrix.entries[ref].planned_in.append(it.number)
    if corpus.architecture is not None:
        for i, row in enumerate(_decision_rows(corpus.architecture), 1):
            if not row:
                continue
            for ref in extract_driver_ids(row[0]):
                if ref in matrix.entries:
                    matrix.entries[ref].decided_in.append(i)
        for heading, _diagram in _sequence_carriers(corpus.architecture):
            if heading is None:
                continue
            for ref in extract_driver_ids(heading):
                if ref in matrix.entries and heading not in matrix.entries[ref].sequenced_in:
                    matrix.entries[ref].sequenced_in.append(heading)
    return matrix
