"""Parser for the iteration-plan document.

The plan is one pipe table with iteration-number, goal and drivers
columns. Driver references are captured from the raw cell text by the
driver-id grammar, so bullet lists, HTML lists or comma strings inside
the cell all work the same way.
"""

from __future__ import annotations

import re

from ..errors import ParseError
from .markdown import TableBlock, scan_blocks
from .types import IterationPlan, ParseIssue, PlannedIteration, extract_driver_ids

_ITER_COL_RE = re.compile(r"iter", re.IGNORECASE)
_GOAL_COL_RE = re.compile(r"goal", re.IGNORECASE)
_DRIVER_COL_RE = re.compile(r"driver", re.IGNORECASE)
_INT_RE = re.compile(r"\d+")


def _plan_columns(headers: list[str]) -> tuple[int, int, int] | None:
    it = goal = drv = None
    for i, h in enumerate(headers):
        if it is None and _ITER_COL_RE.search(h):
            it = i
        elif goal is None and _GOAL_COL_RE.search(h):
            goal = i
        elif drv is None and _DRIVER_COL_RE.search(h):
            drv = i
    if it is None or goal is None or drv is None:
        return None
    return it, goal, drv


def parse_iteration_plan(text: str) -> IterationPlan:
    """Parse the first plan table found in *text*.

    Raises ParseError: NONMONOTONIC_ITERATIONS if numbers are not
    1, 2, 3, ...; EMPTY_GOAL on a blank goal cell; PLAN_TABLE_NOT_FOUND
    when no plan table exists.
    """
    blocks = scan_blocks(text)
    warnings: list[ParseIssue] = []
    plan_table: TableBlock | None = None
    columns: tuple[int, int, int] | None = None
    for block in blocks:
        if not isinstance(block, TableBlock):
            continue
        cols = _plan_columns(block.headers)
        if cols is None:
            continue
        if plan_table is None:
            plan_table, columns = block, cols
        else:
            warnings.append(
                ParseIssue(
                    "EXTRA_PLAN_TABLE",
                    "more than one plan table found; only the first is used",
                    location=f"line {block.line_no}",
                )
            )
    if plan_table is None or columns is None:
        raise ParseError("no iteration-plan table found", code="PLAN_TABLE_NOT_FOUND")

    it_col, goal_col, drv_col = columns
    for issue in plan_table.issues:
        warnings.append(
            ParseIssue(
                "ROW_WIDTH",
                f"row {'padded' if issue.kind == 'short-row' else 'truncated'} to header width",
                location=f"line {issue.line_no}",
            )
        )

    iterations: list[PlannedIteration] = []
    for row_idx, row in enumerate(plan_table.rows):
        line_no = plan_table.line_no + 2 + row_idx
        num_match = _INT_RE.search(row[it_col])
        if num_match is None:
            warnings.append(
                ParseIssue(
                    "UNNUMBERED_ROW",
                    f"plan row without an iteration number: {row[it_col]!r}",
                    location=f"line {line_no}",
                )
            )
            continue
        number = int(num_match.group(0))
        goal = row[goal_col].strip()
        if not goal:
            raise ParseError(
                f"line {line_no}: iteration {number} has an empty goal",
                code="EMPTY_GOAL",
            )
        refs = extract_driver_ids(row[drv_col])
        iterations.append(PlannedIteration(number, goal, refs))

    expected = list(range(1, len(iterations) + 1))
    actual = [it.number for it in iterations]
    if actual != expected:
        raise ParseError(
            f"iteration numbers must be 1..{len(iterations)} in order, got {actual}",
            code="NONMONOTONIC_ITERATIONS",
        )
    return IterationPlan(iterations, warnings=warnings)
