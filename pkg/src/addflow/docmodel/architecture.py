"""Parser for the single canonical architecture document.

The document holds nine known sections. Section headings are matched
case-insensitively by title keyword, with optional leading numbering
(``5.- Container diagram``, ``## 5. Container diagram``, ``# Container
Diagram`` all match). Parsing is total: unknown content degrades to
warnings attached to the result, never an exception.
"""

from __future__ import annotations

from .diagrams import parse_diagram
from .markdown import (
    Fence,
    Heading,
    ProseLine,
    TableBlock,
    render_table,
    scan_blocks,
    strip_enumeration,
)
from .types import (
    DECISION_COLUMNS,
    ArchitectureDocument,
    ArchSection,
    DiagramGraph,
    ParseIssue,
    SectionKind,
    Subsection,
    Table,
)

# Ordered prefix keywords; first match wins, longest keywords first where
# one is a prefix of another.
_SECTION_KEYWORDS: list[tuple[SectionKind, tuple[str, ...]]] = [
    (SectionKind.INTRODUCTION, ("introduction",)),
    (SectionKind.CONTEXT_DIAGRAM, ("context diagram", "system context")),
    (SectionKind.ARCHITECTURAL_DRIVERS, ("architectural driver",)),
    (SectionKind.DOMAIN_MODEL, ("domain model",)),
    (SectionKind.CONTAINER_DIAGRAM, ("container diagram", "container view")),
    (SectionKind.COMPONENT_DIAGRAMS, ("component diagram",)),
    (SectionKind.SEQUENCE_DIAGRAMS, ("sequence diagram",)),
    (SectionKind.INTERFACES, ("interface",)),
    (SectionKind.DESIGN_DECISIONS, ("design decision",)),
]

_ORDER_INDEX = {kind: i for i, kind in enumerate(SectionKind)}


def classify_heading(text: str) -> SectionKind | None:
    cleaned = strip_enumeration(text).casefold()
    for kind, keywords in _SECTION_KEYWORDS:
        for kw in keywords:
            if cleaned.startswith(kw):
                return kind
    return None


class _SectionAccumulator:
    def __init__(self, warnings: list[ParseIssue]):
        self.prose_lines: list[str] = []
        self.diagrams: list[DiagramGraph] = []
        self.tables: list[Table] = []
        self.warnings = warnings

    def feed(self, block: object, location: str) -> None:
        if isinstance(block, ProseLine):
            self.prose_lines.append(block.text)
        elif isinstance(block, Fence):
            if block.tag.strip().casefold() == "mermaid":
                diagram = parse_diagram(block.body)
                for w in diagram.warnings:
                    self.warnings.append(
                        ParseIssue(w.code, w.message, severity=w.severity, location=location)
                    )
                self.diagrams.append(diagram)
            else:
                # non-diagram fences stay part of the prose, verbatim
                tag = block.tag
                self.prose_lines.append(f"```{tag}")
                self.prose_lines.extend(block.body.split("\n") if block.body else [])
                self.prose_lines.append("```")
        elif isinstance(block, TableBlock):
            for issue in block.issues:
                self.warnings.append(
                    ParseIssue(
                        "ROW_WIDTH",
                        f"row {'padded' if issue.kind == 'short-row' else 'truncated'} to header width",
                        location=f"{location}:line {issue.line_no}",
                    )
                )
            self.tables.append(Table(block.headers, block.rows))

    def prose(self) -> str:
        return "\n".join(self.prose_lines).strip()


def parse_architecture_document(text: str) -> ArchitectureDocument:
    """Parse the architecture document. Total: never raises."""
    warnings: list[ParseIssue] = []
    try:
        return _parse(text, warnings)
    except Exception as exc:  # pragma: no cover - safety net
        warnings.append(
            ParseIssue("PARSER_FAILURE", f"unexpected parser failure: {exc!r}", severity="error")
        )
        return ArchitectureDocument(preamble=text, warnings=warnings)


def _parse(text: str, warnings: list[ParseIssue]) -> ArchitectureDocument:
    blocks = scan_blocks(text)

    # Determine the markdown level used for section headings: the shallowest
    # ATX level among recognized headings (numbered-prose headings count as
    # section level).
    section_level: int | None = None
    for b in blocks:
        if isinstance(b, Heading) and classify_heading(b.text) is not None:
            if b.level == 0:
                section_level = 0
                break
            section_level = b.level if section_level is None else min(section_level, b.level)

    sections: dict[SectionKind, ArchSection] = {}
    preamble_acc = _SectionAccumulator(warnings)
    current_section: ArchSection | None = None
    current_acc: _SectionAccumulator | None = None
    current_sub: Subsection | None = None
    sub_acc: _SectionAccumulator | None = None
    last_order = -1

    def close_sub() -> None:
        nonlocal current_sub, sub_acc
        if current_sub is not None and sub_acc is not None:
            current_sub.prose = sub_acc.prose()
            current_sub.diagrams = sub_acc.diagrams
            current_sub.tables = sub_acc.tables
        current_sub, sub_acc = None, None

    def close_section() -> None:
        nonlocal current_section, current_acc
        close_sub()
        if current_section is not None and current_acc is not None:
            current_section.prose = current_acc.prose()
            current_section.diagrams = current_acc.diagrams
            current_section.tables = current_acc.tables
        current_section, current_acc = None, None

    for block in blocks:
        if isinstance(block, Heading):
            kind = classify_heading(block.text)
            is_section = (
                kind is not None
                and section_level is not None
                and (block.level == 0 or (section_level > 0 and block.level <= section_level))
            )
            if is_section and kind is not None:
                close_section()
                order = _ORDER_INDEX[kind]
                if kind in sections:
                    warnings.append(
                        ParseIssue(
                            "DUPLICATE_SECTION",
                            f"section {kind.value!r} appears more than once; "
                            "content after the first occurrence is kept separately",
                            location=f"line {block.line_no}",
                        )
                    )
                    # fold the duplicate into the existing section as a subsection
                    current_section = sections[kind]
                    current_acc = _SectionAccumulator(warnings)
                    current_acc.prose_lines.append(current_section.prose)
                    current_acc.diagrams = current_section.diagrams
                    current_acc.tables = current_section.tables
                    continue
                if order < last_order:
                    warnings.append(
                        ParseIssue(
                            "SECTION_ORDER_VIOLATION",
                            f"section {kind.value!r} appears after a later section",
                            severity="error",
                            location=f"line {block.line_no}",
                        )
                    )
                last_order = max(last_order, order)
                current_section = ArchSection(kind=kind, heading=block.text)
                sections[kind] = current_section
                current_acc = _SectionAccumulator(warnings)
                continue
            if current_section is not None:
                close_sub()
                current_sub = Subsection(heading=block.text)
                current_section.subsections.append(current_sub)
                sub_acc = _SectionAccumulator(warnings)
                continue
            # heading before any section: preamble text
            prefix = "#" * block.level if block.level else ""
            line = f"{prefix} {block.text}".strip() if prefix else f"{block.number}.- {block.text}"
            preamble_acc.prose_lines.append(line)
            continue

        target = sub_acc or current_acc or preamble_acc
        location = current_section.heading if current_section else "preamble"
        if isinstance(block, (ProseLine, Fence, TableBlock)):
            target.feed(block, location)

    close_section()

    for kind in SectionKind:
        if kind not in sections:
            warnings.append(
                ParseIssue("MISSING_SECTION", f"section {kind.value!r} is absent")
            )

    doc = ArchitectureDocument(
        sections=sections, preamble=preamble_acc.prose(), warnings=warnings
    )

    decisions = doc.section(SectionKind.DESIGN_DECISIONS)
    if decisions is not None:
        tables = decisions.tables + [t for s in decisions.subsections for t in s.tables]
        if not tables:
            warnings.append(
                ParseIssue("MISSING_DECISIONS_TABLE", "design-decisions section has no table")
            )
        elif doc.decisions_table() is None:
            found = tuple(h.strip().casefold() for h in tables[0].headers)
            warnings.append(
                ParseIssue(
                    "DECISION_COLUMNS",
                    f"decisions table columns {found} differ from {DECISION_COLUMNS}",
                )
            )
    return doc


def serialize_architecture_document(doc: ArchitectureDocument) -> str:
    """Render the document back to markdown.

    Headings are emitted verbatim as parsed; constructed documents without
    stored headings get canonical ``## N. Title`` headings.
    """
    from .types import SECTION_TITLES

    parts: list[str] = []
    if doc.preamble:
        parts.append(doc.preamble)
    for i, kind in enumerate(SectionKind, start=1):
        section = doc.sections.get(kind)
        if section is None:
            continue
        heading = section.heading or f"{i}. {SECTION_TITLES[kind]}"
        parts.append(f"## {heading}" if not heading.startswith("#") else heading)
        parts.extend(_render_body(section.prose, section.diagrams, section.tables))
        for sub in section.subsections:
            parts.append(f"### {sub.heading}")
            parts.extend(_render_body(sub.prose, sub.diagrams, sub.tables))
    return "\n\n".join(p for p in parts if p) + "\n"


def _render_body(prose: str, diagrams: list[DiagramGraph], tables: list[Table]) -> list[str]:
    parts: list[str] = []
    if prose:
        parts.append(prose)
    for d in diagrams:
        parts.append(f"```mermaid\n{d.raw}\n```")
    for t in tables:
        parts.append(render_table(t.headers, t.rows))
    return parts
