"""Line-oriented markdown block scanner.

The artifact parsers in this package only need a narrow slice of markdown:
ATX headings, fenced code blocks, pipe tables, bullet items and plain prose.
This module turns a document into a flat list of blocks; the artifact
parsers assemble meaning on top.

Two heading styles are recognised:

* ``#``-style ATX headings, and
* numbered-prose headings of the form ``3.- Container diagram`` (a style
  that shows up in exported documents; the ``.-`` marker distinguishes it
  from an ordered-list item such as ``3. do the thing``).

Fences open with three or more backticks and close with a line of at least
as many backticks, which keeps shorter inner fences literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_ATX_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*?)\s*#*\s*$")
_NUMBERED_HEADING_RE = re.compile(r"^\s{0,3}(\d{1,2})\s*\.\s*-\s*(\S.*?)\s*$")
_FENCE_OPEN_RE = re.compile(r"^\s{0,3}(`{3,})\s*(\S*)\s*$")
_TABLE_DELIM_RE = re.compile(r"^\s*\|?\s*:?-{2,}:?\s*(\|\s*:?-{2,}:?\s*)*\|?\s*$")
_BULLET_RE = re.compile(r"^\s*[-*+]\s+(.*)$")
_CELL_SPLIT_RE = re.compile(r"(?<!\\)\|")
_ENUM_PREFIX_RE = re.compile(r"^\s*\d{1,2}\s*[.)\-–]*\s*")


@dataclass
class Heading:
    level: int  # 0 for numbered-prose headings
    text: str
    line_no: int
    number: int | None = None  # leading number, when present


@dataclass
class Fence:
    tag: str
    body: str
    line_no: int
    closed: bool = True


@dataclass
class TableRowIssue:
    kind: str  # "short-row" | "long-row"
    row_index: int
    line_no: int


@dataclass
class TableBlock:
    headers: list[str]
    rows: list[list[str]]
    line_no: int
    issues: list[TableRowIssue] = field(default_factory=list)


@dataclass
class ProseLine:
    text: str
    line_no: int

    @property
    def bullet(self) -> str | None:
        m = _BULLET_RE.match(self.text)
        return m.group(1).strip() if m else None


Block = Heading | Fence | TableBlock | ProseLine


def _unescape_cell(cell: str) -> str:
    return cell.replace("\\|", "|")


def split_row(line: str) -> list[str]:
    """Split one pipe-table row into stripped, unescaped cells."""
    raw = _CELL_SPLIT_RE.split(line)
    # drop the empty fragments produced by boundary pipes
    if raw and raw[0].strip() == "":
        raw = raw[1:]
    if raw and raw[-1].strip() == "":
        raw = raw[:-1]
    return [_unescape_cell(c.strip()) for c in raw]


def _looks_like_row(line: str) -> bool:
    stripped = line.strip()
    return stripped.startswith("|") or ("|" in stripped and not stripped.startswith("```"))


def normalize_table(headers: list[str], rows: list[list[str]], line_no: int) -> TableBlock:
    """Pad short rows / truncate long rows to the header width."""
    width = len(headers)
    issues: list[TableRowIssue] = []
    fixed: list[list[str]] = []
    for i, row in enumerate(rows):
        if len(row) < width:
            issues.append(TableRowIssue("short-row", i, line_no + 2 + i))
            row = row + [""] * (width - len(row))
        elif len(row) > width:
            issues.append(TableRowIssue("long-row", i, line_no + 2 + i))
            row = row[:width]
        fixed.append(row)
    return TableBlock(headers, fixed, line_no, issues)


def scan_blocks(text: str) -> list[Block]:
    """Scan a document into Heading / Fence / TableBlock / ProseLine blocks."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    blocks: list[Block] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]

        fence = _FENCE_OPEN_RE.match(line)
        if fence:
            ticks, tag = fence.group(1), fence.group(2)
            close_re = re.compile(r"^\s{0,3}`{%d,}\s*$" % len(ticks))
            body_lines: list[str] = []
            j = i + 1
            closed = False
            while j < n:
                if close_re.match(lines[j]):
                    closed = True
                    break
                body_lines.append(lines[j])
                j += 1
            blocks.append(Fence(tag, "\n".join(body_lines), i + 1, closed))
            i = j + 1 if closed else n
            continue

        m = _ATX_HEADING_RE.match(line)
        if m:
            blocks.append(Heading(len(m.group(1)), m.group(2), i + 1))
            i += 1
            continue

        m = _NUMBERED_HEADING_RE.match(line)
        if m:
            blocks.append(Heading(0, m.group(2), i + 1, number=int(m.group(1))))
            i += 1
            continue

        if _looks_like_row(line) and i + 1 < n and _TABLE_DELIM_RE.match(lines[i + 1]):
            headers = split_row(line)
            rows: list[list[str]] = []
            j = i + 2
            while j < n and _looks_like_row(lines[j]) and not _TABLE_DELIM_RE.match(lines[j]):
                rows.append(split_row(lines[j]))
                j += 1
            blocks.append(normalize_table(headers, rows, i + 1))
            i = j
            continue

        blocks.append(ProseLine(line, i + 1))
        i += 1
    return blocks


def strip_enumeration(text: str) -> str:
    """Drop a leading ``3.-`` / ``3.`` / ``3)`` enumeration from heading text."""
    return _ENUM_PREFIX_RE.sub("", text, count=1).strip()


def escape_cell(cell: str) -> str:
    return cell.replace("|", "\\|")


def render_table(headers: list[str], rows: list[list[str]]) -> str:
    head = "| " + " | ".join(escape_cell(h) for h in headers) + " |"
    delim = "| " + " | ".join("---" for _ in headers) + " |"
    body = ["| " + " | ".join(escape_cell(c) for c in row) + " |" for row in rows]
    return "\n".join([head, delim] + body)
