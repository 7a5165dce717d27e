"""Canonical markdown serialization for driver sets and iteration plans.

For every artifact type in this package, parse(serialize(x)) is
structurally equal to x. Serialization is also how staged artifacts get
re-rendered after programmatic edits.
"""

from __future__ import annotations

from .markdown import render_table
from .types import Driver, DriverKind, DriverSet, IterationPlan

_KIND_SECTIONS: list[tuple[DriverKind, str, str]] = [
    (DriverKind.USER_STORY, "User Stories", "Story ID"),
    (DriverKind.QA_SCENARIO, "Quality Attribute Scenarios", "Scenario ID"),
    (DriverKind.CONSTRAINT, "Constraints", "Constraint ID"),
    (DriverKind.CONCERN, "Concerns", "Concern ID"),
]


def serialize_driver_set(ds: DriverSet) -> str:
    parts: list[str] = ["# Architectural Drivers"]
    for kind, title, id_header in _KIND_SECTIONS:
        members = ds.of_kind(kind)
        if not members:
            continue
        parts.append(f"## {title}")
        with_desc = any(d.description for d in members)
        headers = [id_header, "Title"] + (["Description"] if with_desc else [])
        rows = [
            [d.id, d.title] + ([d.description or ""] if with_desc else [])
            for d in members
        ]
        parts.append(render_table(headers, rows))

    prioritized = [d for d in ds.drivers if d.importance is not None or d.difficulty is not None]
    primary_stories = [d for d in ds.drivers if d.primary and d.kind == DriverKind.USER_STORY]
    primary_other = [d for d in ds.drivers if d.primary and d.kind != DriverKind.USER_STORY]
    if prioritized or primary_stories or primary_other:
        parts.append("## Priorities")
    if primary_stories:
        parts.append("The primary user stories were determined to be:")
        parts.append("\n".join(f"* {d.id}: {d.title}" if d.title else f"* {d.id}" for d in primary_stories))
    if prioritized:
        headers = [
            "Scenario ID",
            "Importance to the customer",
            "Difficulty of implementation according to the architect",
        ]
        rows = [
            [
                d.id,
                d.importance.value if d.importance else "",
                d.difficulty.value if d.difficulty else "",
            ]
            for d in prioritized
        ]
        parts.append(render_table(headers, rows))
    if primary_other:
        ids = [d.id for d in primary_other]
        if len(ids) == 1:
            listed = ids[0]
        else:
            listed = ", ".join(ids[:-1]) + " and " + ids[-1]
        parts.append(f"From this list, {listed} are selected as primary drivers.")
    return "\n\n".join(parts) + "\n"


def serialize_iteration_plan(plan: IterationPlan) -> str:
    headers = ["Iteration", "Goal", "Drivers to Address"]
    rows = [
        [str(it.number), it.goal, ", ".join(it.driver_refs)]
        for it in plan.iterations
    ]
    return "# Iteration Plan\n\n" + render_table(headers, rows) + "\n"
