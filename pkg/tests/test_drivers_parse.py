"""Drivers-document parsing: declarations, priorities, primary marks."""

from __future__ import annotations

from pathlib import Path

import pytest

from addflow.docmodel import DriverKind, Priority, parse_drivers
from addflow.docmodel.drivers import merge_driver_sets
from addflow.errors import ParseError

FIXTURES = Path(__file__).parent / "fixtures"

HPS_DRIVERS = (FIXTURES / "hps" / "ArchitecturalDrivers.md").read_text()


def test_hps_fixture_declares_all_driver_groups():
    ds = parse_drivers(HPS_DRIVERS)
    assert len(ds.of_kind(DriverKind.USER_STORY)) == 6
    assert len(ds.of_kind(DriverKind.QA_SCENARIO)) == 9
    assert len(ds.of_kind(DriverKind.CONSTRAINT)) == 6
    assert len(ds.of_kind(DriverKind.CONCERN)) == 5


def test_hps_scenarios_carry_printed_priorities():
    ds = parse_drivers(HPS_DRIVERS)
    expected = {
        "QA-1": (Priority.HIGH, Priority.HIGH),
        "QA-2": (Priority.HIGH, Priority.HIGH),
        "QA-3": (Priority.HIGH, Priority.HIGH),
        "QA-4": (Priority.HIGH, Priority.HIGH),
        "QA-5": (Priority.HIGH, Priority.MEDIUM),
        "QA-6": (Priority.MEDIUM, Priority.MEDIUM),
        "QA-7": (Priority.MEDIUM, Priority.MEDIUM),
        "QA-8": (Priority.MEDIUM, Priority.MEDIUM),
        "QA-9": (Priority.MEDIUM, Priority.MEDIUM),
    }
    for driver_id, (imp, diff) in expected.items():
        d = ds.by_id(driver_id)
        assert d is not None, driver_id
        assert (d.importance, d.difficulty) == (imp, diff), driver_id


def test_hps_primary_marks():
    ds = parse_drivers(HPS_DRIVERS)
    primary_scenarios = {d.id for d in ds.primaries() if d.kind == DriverKind.QA_SCENARIO}
    assert primary_scenarios == {"QA-1", "QA-2", "QA-3", "QA-4", "QA-5"}
    primary_stories = {d.id for d in ds.primaries() if d.kind == DriverKind.USER_STORY}
    assert primary_stories == {"HPS-2", "HPS-3", "HPS-4"}
    assert ds.primary_statement and "primary" in ds.primary_statement


def test_titles_from_escaped_hyphen_cells():
    doc = (
        "## Priorities\n\n"
        "| Scenario ID | Importance to the customer | Difficulty of implementation |\n"
        "| :---- | :---- | :---- |\n"
        "| QA-1 \\- Performance | High | High |\n"
    )
    ds = parse_drivers(doc)
    d = ds.by_id("QA-1")
    assert d is not None
    assert d.title == "Performance"
    assert d.kind == DriverKind.QA_SCENARIO


def test_ids_in_prose_do_not_declare():
    doc = (
        "Some text mentions QA-3 in passing.\n\n"
        "## Quality Attribute Scenarios\n\n"
        "| Scenario ID | Title |\n| --- | --- |\n| QA-1 | Performance |\n"
    )
    ds = parse_drivers(doc)
    assert ds.ids() == {"QA-1"}


def test_unpadded_id_forms_are_matched():
    doc = (
        "## User Stories\n\n"
        "| ID | Title |\n| --- | --- |\n| US001 | Registration |\n| QAS015 | Recovery |\n"
    )
    ds = parse_drivers(doc)
    assert ds.ids() == {"US001", "QAS015"}
    assert ds.by_id("QAS015").kind == DriverKind.QA_SCENARIO


def test_malformed_priority_value_raises():
    doc = (
        "| Scenario ID | Importance | Difficulty |\n"
        "| --- | --- | --- |\n"
        "| QA-1 | Urgent | High |\n"
    )
    with pytest.raises(ParseError) as err:
        parse_drivers(doc)
    assert err.value.code == "MALFORMED_PRIORITY_VALUE"


def test_conflicting_titles_raise_duplicate_id():
    doc = (
        "## User Stories\n\n"
        "| ID | Title |\n| --- | --- |\n| HPS-1 | Log In |\n\n"
        "## Constraints\n\n"
        "| ID | Title |\n| --- | --- |\n| HPS-1 | Something Else |\n"
    )
    with pytest.raises(ParseError) as err:
        parse_drivers(doc)
    assert err.value.code == "DUPLICATE_DRIVER_ID"


def test_conflicting_kinds_raise_duplicate_id():
    doc = (
        "## User Stories\n\n"
        "| ID | Title |\n| --- | --- |\n| XY-1 | Thing |\n\n"
        "## Constraints\n\n"
        "| ID | Title |\n| --- | --- |\n| XY-1 | Thing |\n"
    )
    with pytest.raises(ParseError) as err:
        parse_drivers(doc)
    assert err.value.code == "DUPLICATE_DRIVER_ID"


def test_consistent_redeclaration_merges():
    doc = (
        "## Quality Attribute Scenarios\n\n"
        "| Scenario ID | Title |\n| --- | --- |\n| QA-1 | Performance |\n\n"
        "## Priorities\n\n"
        "| Scenario ID | Importance | Difficulty |\n| --- | --- | --- |\n"
        "| QA-1 | High | Medium |\n"
    )
    ds = parse_drivers(doc)
    assert len(ds.drivers) == 1
    d = ds.by_id("QA-1")
    assert d.title == "Performance"
    assert (d.importance, d.difficulty) == (Priority.HIGH, Priority.MEDIUM)


def test_short_rows_padded_with_warning():
    doc = "| Scenario ID | Title |\n| --- | --- |\n| QA-1 |\n"
    ds = parse_drivers(doc)
    assert ds.by_id("QA-1").title == ""
    assert any(w.code == "ROW_WIDTH" for w in ds.warnings)


def test_merge_driver_sets_across_files():
    main = parse_drivers("## User Stories\n\n| ID | Title |\n| --- | --- |\n| HPS-1 | Log In |\n")
    extra = parse_drivers("## Constraints\n\n| ID | Title |\n| --- | --- |\n| CON-1 | Web UI |\n")
    merged = merge_driver_sets([("main", main), ("extra", extra)])
    assert merged.ids() == {"HPS-1", "CON-1"}


def test_merge_conflict_across_files_raises():
    a = parse_drivers("## User Stories\n\n| ID | Title |\n| --- | --- |\n| HPS-1 | Log In |\n")
    b = parse_drivers("## User Stories\n\n| ID | Title |\n| --- | --- |\n| HPS-1 | Sign In |\n")
    with pytest.raises(ParseError) as err:
        merge_driver_sets([("a", a), ("b", b)])
    assert err.value.code == "DUPLICATE_DRIVER_ID"
