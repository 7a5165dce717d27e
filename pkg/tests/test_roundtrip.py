"""parse(serialize(x)) == x for every artifact type."""

from hypothesis import given, settings

import strategies as strat
from addflow.docmodel import (
    parse_architecture_document,
    parse_diagram,
    parse_drivers,
    parse_iteration_plan,
    parse_iteration_record,
    serialize_architecture_document,
    serialize_diagram,
    serialize_driver_set,
    serialize_iteration_plan,
    serialize_iteration_record,
)

_SETTINGS = settings(max_examples=150, deadline=None, derandomize=True)


@_SETTINGS
@given(strat.driver_sets())
def test_driver_set_round_trip(ds):
    assert parse_drivers(serialize_driver_set(ds)) == ds


@_SETTINGS
@given(strat.iteration_plans())
def test_iteration_plan_round_trip(plan):
    assert parse_iteration_plan(serialize_iteration_plan(plan)) == plan


@_SETTINGS
@given(strat.architecture_documents())
def test_architecture_document_round_trip(doc):
    assert parse_architecture_document(serialize_architecture_document(doc)) == doc


@_SETTINGS
@given(strat.iteration_records)
def test_iteration_record_round_trip(rec):
    assert parse_iteration_record(serialize_iteration_record(rec)) == rec


@_SETTINGS
@given(strat.diagram_sources)
def test_diagram_round_trip(source):
    graph = parse_diagram(source)
    assert serialize_diagram(graph) == source
    assert parse_diagram(serialize_diagram(graph)) == graph


def test_adjacent_blocks_round_trip():
    # generators keep lists short, so pin the seams between
    # consecutive fenced diagrams, tables, and subsections directly
    from addflow.docmodel import ArchitectureDocument, ArchSection, SectionKind, Subsection, Table

    diagram = parse_diagram("flowchart TD\n    A --> B")
    table = Table(["col"], [["x"], [""]])
    twin = Subsection(heading="twin", prose="", diagrams=[diagram, diagram], tables=[table])
    section = ArchSection(
        kind=SectionKind.CONTAINER_DIAGRAM,
        heading="5. Container diagram",
        prose="two of everything",
        diagrams=[diagram, diagram],
        tables=[table, table],
        subsections=[twin, twin],
    )
    doc = ArchitectureDocument(sections={SectionKind.CONTAINER_DIAGRAM: section}, preamble="")
    assert parse_architecture_document(serialize_architecture_document(doc)) == doc
