"""Parser for the architectural-drivers document.

Drivers are declared by tables (a declaration table keyed by an id-bearing
column, or a priority table carrying importance/difficulty columns) and by
primary-selection statements; ids that only show up in running prose do
not declare anything.
"""

from __future__ import annotations

import re

from ..errors import ParseError
from .markdown import Heading, ProseLine, TableBlock, scan_blocks
from .types import (
    Driver,
    DriverKind,
    DriverSet,
    ParseIssue,
    Priority,
    extract_driver_ids,
)

_IMPORTANCE_RE = re.compile(r"importance", re.IGNORECASE)
_DIFFICULTY_RE = re.compile(r"difficult", re.IGNORECASE)
_ID_COLUMN_RE = re.compile(r"\b(id|identifier|scenario|driver|stor(?:y|ies)|constraint|concern)\b", re.IGNORECASE)
_PRIMARY_STORIES_RE = re.compile(r"primary\s+user\s+stor", re.IGNORECASE)
_PRIMARY_DRIVERS_RE = re.compile(r"primary\s+driver", re.IGNORECASE)
_TITLE_SEP_RE = re.compile(r"^[\s\\\-–—:.]+")

_KIND_BY_PREFIX = {
    "QA": DriverKind.QA_SCENARIO,
    "QAS": DriverKind.QA_SCENARIO,
    "US": DriverKind.USER_STORY,
    "CON": DriverKind.CONSTRAINT,
    "CRN": DriverKind.CONCERN,
}

_KIND_HEADING_PATTERNS = [
    (re.compile(r"user\s+stor|functional\s+requirement", re.IGNORECASE), DriverKind.USER_STORY),
    (re.compile(r"scenario|quality\s+attribute", re.IGNORECASE), DriverKind.QA_SCENARIO),
    (re.compile(r"constraint", re.IGNORECASE), DriverKind.CONSTRAINT),
    (re.compile(r"concern", re.IGNORECASE), DriverKind.CONCERN),
]


def _prefix_kind(driver_id: str) -> DriverKind | None:
    prefix = re.match(r"[A-Z]+", driver_id)
    return _KIND_BY_PREFIX.get(prefix.group(0)) if prefix else None


def _context_kind(heading_text: str | None, header_cell: str) -> DriverKind | None:
    for source in (header_cell, heading_text or ""):
        for pattern, kind in _KIND_HEADING_PATTERNS:
            if pattern.search(source):
                return kind
    return None


def _split_id_cell(cell: str) -> tuple[str | None, str]:
    ids = extract_driver_ids(cell)
    if not ids:
        return None, cell.strip()
    driver_id = ids[0]
    idx = cell.find(driver_id)
    remainder = cell[idx + len(driver_id):]
    return driver_id, _TITLE_SEP_RE.sub("", remainder).strip()


class _Builder:
    def __init__(self) -> None:
        self.order: list[str] = []
        self.drivers: dict[str, Driver] = {}
        self.warnings: list[ParseIssue] = []

    def add(
        self,
        driver_id: str,
        *,
        kind: DriverKind | None,
        kind_inferred: bool,
        title: str = "",
        title_authoritative: bool = True,
        description: str | None = None,
        importance: Priority | None = None,
        difficulty: Priority | None = None,
        primary: bool | None = None,
        location: str | None = None,
    ) -> None:
        existing = self.drivers.get(driver_id)
        if existing is None:
            self.drivers[driver_id] = Driver(
                id=driver_id,
                kind=kind or _prefix_kind(driver_id) or DriverKind.USER_STORY,
                title=title,
                description=description,
                importance=importance,
                difficulty=difficulty,
                primary=bool(primary),
            )
            self.order.append(driver_id)
            return
        # merge a re-declaration; conflicting facts are an error
        if kind is not None and not kind_inferred and existing.kind != kind:
            raise ParseError(
                f"driver {driver_id} declared as both {existing.kind.value} and {kind.value}"
                + (f" ({location})" if location else ""),
                code="DUPLICATE_DRIVER_ID",
            )
        if title:
            if existing.title and existing.title.casefold() != title.casefold():
                # a bare mention (primary statement) never overrides a table title
                if title_authoritative:
                    raise ParseError(
                        f"driver {driver_id} declared twice with different titles: "
                        f"{existing.title!r} vs {title!r}",
                        code="DUPLICATE_DRIVER_ID",
                    )
            else:
                existing.title = existing.title or title
        if description and not existing.description:
            existing.description = description
        for attr, value in (("importance", importance), ("difficulty", difficulty)):
            if value is not None:
                old = getattr(existing, attr)
                if old is not None and old != value:
                    raise ParseError(
                        f"driver {driver_id} has conflicting {attr} values: "
                        f"{old.value} vs {value.value}",
                        code="DUPLICATE_DRIVER_ID",
                    )
                setattr(existing, attr, value)
        if primary:
            existing.primary = True

    def result(self, primary_statement: str | None) -> DriverSet:
        return DriverSet(
            drivers=[self.drivers[i] for i in self.order],
            primary_statement=primary_statement,
            warnings=self.warnings,
        )


def _parse_priority_cell(cell: str, column: str, line_no: int) -> Priority:
    value = Priority.parse(cell)
    if value is None:
        raise ParseError(
            f"line {line_no}: {column} value {cell.strip()!r} is not High/Medium/Low",
            code="MALFORMED_PRIORITY_VALUE",
        )
    return value


def _handle_table(table: TableBlock, heading: str | None, builder: _Builder) -> None:
    if not table.headers:
        return
    imp_col = next((i for i, h in enumerate(table.headers) if _IMPORTANCE_RE.search(h)), None)
    diff_col = next((i for i, h in enumerate(table.headers) if _DIFFICULTY_RE.search(h)), None)
    id_col = next((i for i, h in enumerate(table.headers) if _ID_COLUMN_RE.search(h)), None)
    for issue in table.issues:
        builder.warnings.append(
            ParseIssue(
                "ROW_WIDTH",
                f"row {'padded' if issue.kind == 'short-row' else 'truncated'} to header width",
                location=f"line {issue.line_no}",
            )
        )

    if imp_col is not None and diff_col is not None:
        key_col = id_col if id_col is not None else 0
        header_cell = table.headers[key_col]
        for row_idx, row in enumerate(table.rows):
            driver_id, title = _split_id_cell(row[key_col])
            if driver_id is None:
                builder.warnings.append(
                    ParseIssue(
                        "UNIDENTIFIED_ROW",
                        f"priority row without a driver id: {row[key_col]!r}",
                        location=f"line {table.line_no + 2 + row_idx}",
                    )
                )
                continue
            line_no = table.line_no + 2 + row_idx
            imp_cell, diff_cell = row[imp_col], row[diff_col]
            builder.add(
                driver_id,
                kind=_context_kind(heading, header_cell),
                kind_inferred=True,
                title=title,
                title_authoritative=False,
                importance=_parse_priority_cell(imp_cell, "importance", line_no)
                if imp_cell.strip()
                else None,
                difficulty=_parse_priority_cell(diff_cell, "difficulty", line_no)
                if diff_cell.strip()
                else None,
                location=f"line {line_no}",
            )
        return

    if id_col is None:
        return
    title_col = next(
        (i for i, h in enumerate(table.headers) if h.strip().casefold() in ("title", "name")),
        None,
    )
    desc_col = next(
        (i for i, h in enumerate(table.headers) if h.strip().casefold() == "description"),
        None,
    )
    header_cell = table.headers[id_col]
    context_kind = _context_kind(heading, header_cell)
    any_ids = False
    for row_idx, row in enumerate(table.rows):
        driver_id, inline_title = _split_id_cell(row[id_col])
        if driver_id is None:
            continue
        any_ids = True
        title = row[title_col].strip() if title_col is not None else inline_title
        description = row[desc_col].strip() if desc_col is not None and row[desc_col].strip() else None
        # a well-known id prefix beats the surrounding heading: QAS015 stays a
        # scenario even when listed inside a user-story table
        builder.add(
            driver_id,
            kind=_prefix_kind(driver_id) or context_kind,
            kind_inferred=False,
            title=title,
            description=description,
            location=f"line {table.line_no + 2 + row_idx}",
        )
    if not any_ids and table.rows:
        builder.warnings.append(
            ParseIssue(
                "NO_DRIVER_IDS",
                "table with an id-like column declares no parsable driver ids",
                location=f"line {table.line_no}",
            )
        )


def parse_drivers(text: str, *, source: str | None = None) -> DriverSet:
    """Parse one drivers document into a DriverSet.

    Raises ParseError with code DUPLICATE_DRIVER_ID on conflicting
    re-declarations and MALFORMED_PRIORITY_VALUE on a priority cell
    outside High/Medium/Low.
    """
    blocks = scan_blocks(text)
    builder = _Builder()
    current_heading: str | None = None
    statements: list[str] = []

    i = 0
    while i < len(blocks):
        block = blocks[i]
        if isinstance(block, Heading):
            current_heading = block.text
        elif isinstance(block, TableBlock):
            _handle_table(block, current_heading, builder)
        elif isinstance(block, ProseLine):
            line = block.text
            if _PRIMARY_STORIES_RE.search(line):
                statements.append(line.strip())
                inline_ids = extract_driver_ids(line)
                for driver_id in inline_ids:
                    builder.add(
                        driver_id,
                        kind=DriverKind.USER_STORY,
                        kind_inferred=True,
                        primary=True,
                    )
                # collect the bullet list that follows the statement
                j = i + 1
                while j < len(blocks):
                    nxt = blocks[j]
                    if isinstance(nxt, ProseLine):
                        if nxt.text.strip() == "":
                            j += 1
                            continue
                        bullet = nxt.bullet
                        if bullet is not None:
                            statements.append(nxt.text.strip())
                            ids = extract_driver_ids(bullet)
                            if ids:
                                _, title = _split_id_cell(bullet)
                                title = title.split("\\-")[0].split(" - ")[0].strip()
                                builder.add(
                                    ids[0],
                                    kind=DriverKind.USER_STORY,
                                    kind_inferred=True,
                                    title=title,
                                    title_authoritative=False,
                                    primary=True,
                                )
                            j += 1
                            continue
                    break
                i = j
                continue
            if _PRIMARY_DRIVERS_RE.search(line):
                ids = extract_driver_ids(line)
                if ids:
                    statements.append(line.strip())
                    for driver_id in ids:
                        builder.add(
                            driver_id,
                            kind=_prefix_kind(driver_id),
                            kind_inferred=True,
                            primary=True,
                        )
        i += 1

    statement = "\n".join(statements) if statements else None
    result = builder.result(statement)
    if source:
        for w in result.warnings:
            w.location = f"{source}:{w.location}" if w.location else source
    return result


def merge_driver_sets(sets: list[tuple[str, DriverSet]]) -> DriverSet:
    """Merge driver sets parsed from several files (main doc + extras).

    Conflicting re-declarations across files raise DUPLICATE_DRIVER_ID,
    mirroring the single-file rule.
    """
    builder = _Builder()
    statements: list[str] = []
    for name, ds in sets:
        for d in ds.drivers:
            builder.add(
                d.id,
                kind=d.kind,
                kind_inferred=False,
                title=d.title,
                description=d.description,
                importance=d.importance,
                difficulty=d.difficulty,
                primary=d.primary,
                location=name,
            )
        if ds.primary_statement:
            statements.append(ds.primary_statement)
        builder.warnings.extend(ds.warnings)
    return builder.result("\n".join(statements) if statements else None)
