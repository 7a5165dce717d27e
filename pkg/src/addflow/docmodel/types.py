"""Data model for the design artifacts the workflow reads and writes.

All types are plain dataclasses. Fields that only carry diagnostics
(warnings, captured raw statements) are excluded from equality so that
"structural equality" between a value and its parse(serialize(...)) image
is the default ``==``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

DRIVER_ID_RE = re.compile(r"\b([A-Z]{2,4}-?\d{1,4})\b")


def extract_driver_ids(text: str) -> list[str]:
    """All driver identifiers in *text*, deduplicated, in order of appearance.

    The identifier grammar is 2-4 capital letters, an optional hyphen and
    1-4 digits; it is matched anywhere inside the text.
    """
    seen: dict[str, None] = {}
    for m in DRIVER_ID_RE.finditer(text):
        seen.setdefault(m.group(1))
    return list(seen)


class DriverKind(str, Enum):
    USER_STORY = "user-story"
    QA_SCENARIO = "qa-scenario"
    CONSTRAINT = "constraint"
    CONCERN = "concern"


class Priority(str, Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @classmethod
    def parse(cls, text: str) -> "Priority | None":
        t = text.strip().strip("\\").strip().casefold()
        for member in cls:
            if member.value.casefold() == t:
                return member
        return None


@dataclass
class ParseIssue:
    code: str
    message: str
    severity: str = "warning"  # "warning" | "error"
    location: str | None = None

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        loc = f" [{self.location}]" if self.location else ""
        return f"{self.severity}:{self.code}: {self.message}{loc}"


@dataclass
class Driver:
    id: str
    kind: DriverKind
    title: str = ""
    description: str | None = None
    importance: Priority | None = None
    difficulty: Priority | None = None
    primary: bool = False


@dataclass
class DriverSet:
    drivers: list[Driver] = field(default_factory=list)
    primary_statement: str | None = field(default=None, compare=False)
    warnings: list[ParseIssue] = field(default_factory=list, compare=False)

    def by_id(self, driver_id: str) -> Driver | None:
        for d in self.drivers:
            if d.id == driver_id:
                return d
        return None

    def ids(self) -> set[str]:
        return {d.id for d in self.drivers}

    def of_kind(self, kind: DriverKind) -> list[Driver]:
        return [d for d in self.drivers if d.kind == kind]

    def primaries(self) -> list[Driver]:
        return [d for d in self.drivers if d.primary]


@dataclass
class PlannedIteration:
    number: int
    goal: str
    driver_refs: list[str] = field(default_factory=list)


@dataclass
class IterationPlan:
    iterations: list[PlannedIteration] = field(default_factory=list)
    warnings: list[ParseIssue] = field(default_factory=list, compare=False)

    def iteration(self, number: int) -> PlannedIteration | None:
        for it in self.iterations:
            if it.number == number:
                return it
        return None

    def all_refs(self) -> list[str]:
        out: dict[str, None] = {}
        for it in self.iterations:
            for ref in it.driver_refs:
                out.setdefault(ref)
        return list(out)


class DiagramKind(str, Enum):
    CLASS = "class"
    FLOWCHART = "flowchart"
    SEQUENCE = "sequence"
    OPAQUE = "opaque"


@dataclass
class DiagramNode:
    id: str
    label: str
    stereotype: str | None = None


@dataclass
class DiagramEdge:
    source: str
    target: str
    label: str | None = None


@dataclass
class DiagramMessage:
    source: str
    target: str
    label: str = ""


@dataclass
class DiagramGraph:
    """Parsed diagram. ``raw`` is always the exact fenced body.

    For sequence diagrams, ``participants`` holds participant ids in
    declaration order and ``nodes`` mirrors them with display labels so
    callers can match either form against structural diagrams.
    """

    kind: DiagramKind
    raw: str
    nodes: list[DiagramNode] = field(default_factory=list)
    edges: list[DiagramEdge] = field(default_factory=list)
    participants: list[str] = field(default_factory=list)
    messages: list[DiagramMessage] = field(default_factory=list)
    warnings: list[ParseIssue] = field(default_factory=list, compare=False)

    def names(self) -> set[str]:
        """Every node id and label, for element matching."""
        out: set[str] = set()
        for n in self.nodes:
            out.add(n.id)
            if n.label:
                out.add(n.label)
        out.update(self.participants)
        return out


@dataclass
class Table:
    headers: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)

    def column(self, name: str) -> int | None:
        target = name.strip().casefold()
        for i, h in enumerate(self.headers):
            if h.strip().casefold() == target:
                return i
        return None


class SectionKind(str, Enum):
    INTRODUCTION = "introduction"
    CONTEXT_DIAGRAM = "context-diagram"
    ARCHITECTURAL_DRIVERS = "architectural-drivers"
    DOMAIN_MODEL = "domain-model"
    CONTAINER_DIAGRAM = "container-diagram"
    COMPONENT_DIAGRAMS = "component-diagrams"
    SEQUENCE_DIAGRAMS = "sequence-diagrams"
    INTERFACES = "interfaces"
    DESIGN_DECISIONS = "design-decisions"


SECTION_ORDER: tuple[SectionKind, ...] = tuple(SectionKind)

SECTION_TITLES: dict[SectionKind, str] = {
    SectionKind.INTRODUCTION: "Introduction",
    SectionKind.CONTEXT_DIAGRAM: "Context diagram",
    SectionKind.ARCHITECTURAL_DRIVERS: "Architectural drivers",
    SectionKind.DOMAIN_MODEL: "Domain model",
    SectionKind.CONTAINER_DIAGRAM: "Container diagram",
    SectionKind.COMPONENT_DIAGRAMS: "Component diagrams",
    SectionKind.SEQUENCE_DIAGRAMS: "Sequence diagrams",
    SectionKind.INTERFACES: "Interfaces",
    SectionKind.DESIGN_DECISIONS: "Design decisions",
}

DECISION_COLUMNS = ("driver", "decision", "rationale", "discarded alternative")


@dataclass
class Subsection:
    heading: str
    prose: str = ""
    diagrams: list[DiagramGraph] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)


@dataclass
class ArchSection:
    kind: SectionKind
    heading: str
    prose: str = ""
    diagrams: list[DiagramGraph] = field(default_factory=list)
    tables: list[Table] = field(default_factory=list)
    subsections: list[Subsection] = field(default_factory=list)

    def all_diagrams(self) -> list[DiagramGraph]:
        out = list(self.diagrams)
        for sub in self.subsections:
            out.extend(sub.diagrams)
        return out


@dataclass
class ArchitectureDocument:
    sections: dict[SectionKind, ArchSection] = field(default_factory=dict)
    preamble: str = ""
    warnings: list[ParseIssue] = field(default_factory=list, compare=False)

    def section(self, kind: SectionKind) -> ArchSection | None:
        return self.sections.get(kind)

    def decisions_table(self) -> Table | None:
        sec = self.section(SectionKind.DESIGN_DECISIONS)
        if sec is None:
            return None
        for table in sec.tables + [t for s in sec.subsections for t in s.tables]:
            normalized = tuple(h.strip().casefold() for h in table.headers)
            if normalized == DECISION_COLUMNS:
                return table
        return None


@dataclass
class ConceptRow:
    concept: str
    rationale: str = ""
    discarded_alternatives: str = ""


@dataclass
class InstantiationRow:
    decision: str
    rationale: str = ""


CONCEPT_TABLE_COLUMNS = ("selected design concept", "rationale", "discarded alternatives")
INSTANTIATION_TABLE_COLUMNS = ("instantiation decision", "rationale")


@dataclass
class IterationRecord:
    iteration_number: int | None = None
    goal_drivers: list[str] = field(default_factory=list)
    refined_elements: list[str] = field(default_factory=list)
    concept_table: list[ConceptRow] = field(default_factory=list)
    instantiation_table: list[InstantiationRow] = field(default_factory=list)
    analysis: str = ""
    warnings: list[ParseIssue] = field(default_factory=list, compare=False)

    @property
    def completed(self) -> bool:
        """An iteration record counts as completed once its analysis is written."""
        return bool(self.analysis.strip())
