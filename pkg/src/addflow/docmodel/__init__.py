"""Typed document model: parsers and serializers for all design artifacts."""

from .architecture import (
    classify_heading,
    parse_architecture_document,
    serialize_architecture_document,
)
from .diagrams import parse_diagram, serialize_diagram
from .drivers import merge_driver_sets, parse_drivers
from .iteration import STEP_TITLES, parse_iteration_record, serialize_iteration_record
from .plan import parse_iteration_plan
from .serialize import serialize_driver_set, serialize_iteration_plan
from .types import (
    CONCEPT_TABLE_COLUMNS,
    DECISION_COLUMNS,
    INSTANTIATION_TABLE_COLUMNS,
    SECTION_ORDER,
    SECTION_TITLES,
    ArchitectureDocument,
    ArchSection,
    ConceptRow,
    DiagramEdge,
    DiagramGraph,
    DiagramKind,
    DiagramMessage,
    DiagramNode,
    Driver,
    DriverKind,
    DriverSet,
    InstantiationRow,
    IterationPlan,
    IterationRecord,
    ParseIssue,
    PlannedIteration,
    Priority,
    SectionKind,
    Subsection,
    Table,
    extract_driver_ids,
)

__all__ = [
    "ArchitectureDocument",
    "ArchSection",
    "ConceptRow",
    "CONCEPT_TABLE_COLUMNS",
    "DECISION_COLUMNS",
    "DiagramEdge",
    "DiagramGraph",
    "DiagramKind",
    "DiagramMessage",
    "DiagramNode",
    "Driver",
    "DriverKind",
    "DriverSet",
    "InstantiationRow",
    "INSTANTIATION_TABLE_COLUMNS",
    "IterationPlan",
    "IterationRecord",
    "ParseIssue",
    "PlannedIteration",
    "Priority",
    "SECTION_ORDER",
    "SECTION_TITLES",
    "SectionKind",
    "STEP_TITLES",
    "Subsection",
    "Table",
    "classify_heading",
    "extract_driver_ids",
    "merge_driver_sets",
    "parse_architecture_document",
    "parse_diagram",
    "parse_drivers",
    "parse_iteration_plan",
    "parse_iteration_record",
    "serialize_architecture_document",
    "serialize_diagram",
    "serialize_driver_set",
    "serialize_iteration_plan",
    "serialize_iteration_record",
]
