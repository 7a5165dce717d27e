"""Parser for per-iteration working documents.

An iteration record carries the outputs of the in-iteration steps: the
selected goal drivers, the elements chosen for refinement, the design
concept table, the instantiation table and the closing analysis. The two
tables are located by their exact column signatures (case-insensitive
text, exact column count); everything else is located by step headings.
Parsing is total.
"""

from __future__ import annotations

import re

from .markdown import Heading, ProseLine, TableBlock, render_table, scan_blocks
from .types import (
    CONCEPT_TABLE_COLUMNS,
    INSTANTIATION_TABLE_COLUMNS,
    ConceptRow,
    InstantiationRow,
    IterationRecord,
    ParseIssue,
    extract_driver_ids,
)

_ITERATION_RE = re.compile(r"\biteration\s+(\d+)", re.IGNORECASE)
_STEP_RE = re.compile(r"\bstep\s*(\d)\b", re.IGNORECASE)


def _norm_headers(headers: list[str]) -> tuple[str, ...]:
    return tuple(h.strip().casefold() for h in headers)


def parse_iteration_record(text: str, *, number: int | None = None) -> IterationRecord:
    """Parse an iteration record. Total: never raises."""
    warnings: list[ParseIssue] = []
    try:
        return _parse(text, number, warnings)
    except Exception as exc:  # pragma: no cover - safety net
        warnings.append(
            ParseIssue("PARSER_FAILURE", f"unexpected parser failure: {exc!r}", severity="error")
        )
        return IterationRecord(iteration_number=number, warnings=warnings)


def _parse(text: str, number: int | None, warnings: list[ParseIssue]) -> IterationRecord:
    blocks = scan_blocks(text)
    record = IterationRecord(iteration_number=number, warnings=warnings)

    current_step: int | None = None
    step_text: dict[int, list[str]] = {}
    step_bullets: dict[int, list[str]] = {}

    for block in blocks:
        if isinstance(block, Heading):
            if record.iteration_number is None:
                m = _ITERATION_RE.search(block.text)
                if m:
                    record.iteration_number = int(m.group(1))
            m = _STEP_RE.search(block.text)
            if m:
                current_step = int(m.group(1))
                step_text.setdefault(current_step, [])
                step_bullets.setdefault(current_step, [])
            continue
        if isinstance(block, TableBlock):
            headers = _norm_headers(block.headers)
            for issue in block.issues:
                warnings.append(
                    ParseIssue(
                        "ROW_WIDTH",
                        f"row {'padded' if issue.kind == 'short-row' else 'truncated'} to header width",
                        location=f"line {issue.line_no}",
                    )
                )
            if headers == CONCEPT_TABLE_COLUMNS:
                record.concept_table.extend(
                    ConceptRow(r[0], r[1], r[2]) for r in block.rows
                )
            elif headers == INSTANTIATION_TABLE_COLUMNS:
                record.instantiation_table.extend(
                    InstantiationRow(r[0], r[1]) for r in block.rows
                )
            elif current_step is not None:
                # ids inside auxiliary step-2 tables still count toward the goal
                if current_step == 2:
                    for row in block.rows:
                        for cell in row:
                            step_bullets[2].extend(extract_driver_ids(cell))
            continue
        if isinstance(block, ProseLine) and current_step is not None:
            step_text[current_step].append(block.text)
            bullet = block.bullet
            if bullet is not None:
                step_bullets[current_step].append(bullet)

    goal_source = "\n".join(step_text.get(2, []))
    seen: dict[str, None] = {}
    for driver_id in extract_driver_ids(goal_source) + [
        i for b in step_bullets.get(2, []) for i in extract_driver_ids(b)
    ]:
        seen.setdefault(driver_id)
    record.goal_drivers = list(seen)

    record.refined_elements = [b for b in step_bullets.get(3, []) if b]
    record.analysis = "\n".join(step_text.get(7, [])).strip()

    if not record.concept_table:
        warnings.append(
            ParseIssue("MISSING_CONCEPT_TABLE", "no design-concept table found")
        )
    if not record.instantiation_table:
        warnings.append(
            ParseIssue("MISSING_INSTANTIATION_TABLE", "no instantiation table found")
        )
    if record.iteration_number is None:
        warnings.append(
            ParseIssue("MISSING_ITERATION_NUMBER", "no iteration number found in headings")
        )
    return record


STEP_TITLES: dict[int, str] = {
    2: "Establish the Iteration Goal by Selecting Drivers",
    3: "Choose One or More Elements of the System to Refine",
    4: "Choose One or More Design Concepts That Satisfy the Selected Drivers",
    5: "Instantiate Architectural Elements, Sketch Views, Allocate Responsibilities, and Define Interfaces",
    6: "Record Design Decisions",
    7: "Perform Analysis of the Current Design and Review the Iteration Goal",
}


def serialize_iteration_record(record: IterationRecord) -> str:
    parts: list[str] = []
    if record.iteration_number is not None:
        parts.append(f"# Iteration {record.iteration_number}")
    parts.append(f"## Step 2: {STEP_TITLES[2]}")
    if record.goal_drivers:
        parts.append("Drivers addressed in this iteration: " + ", ".join(record.goal_drivers))
    parts.append(f"## Step 3: {STEP_TITLES[3]}")
    if record.refined_elements:
        parts.append("\n".join(f"- {e}" for e in record.refined_elements))
    parts.append(f"## Step 4: {STEP_TITLES[4]}")
    parts.append(
        render_table(
            ["Selected design concept", "Rationale", "Discarded Alternatives"],
            [[r.concept, r.rationale, r.discarded_alternatives] for r in record.concept_table],
        )
    )
    parts.append(f"## Step 5: {STEP_TITLES[5]}")
    parts.append(
        render_table(
            ["Instantiation decision", "Rationale"],
            [[r.decision, r.rationale] for r in record.instantiation_table],
        )
    )
    parts.append(f"## Step 7: {STEP_TITLES[7]}")
    if record.analysis:
        parts.append(record.analysis)
    return "\n\n".join(parts) + "\n"
