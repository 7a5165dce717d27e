"""Parser for the diagram-notation subset used in design documents.

Three diagram kinds are parsed into graphs: class diagrams, flowcharts
(``flowchart``/``graph``) and sequence diagrams. Any other first-line
keyword yields an opaque diagram whose raw text is preserved byte-exact.
A recognised kind whose body contains unparsable lines is downgraded to
opaque with a DIAGRAM_SYNTAX warning; it never raises.
"""

from __future__ import annotations

import re

from .types import (
    DiagramEdge,
    DiagramGraph,
    DiagramKind,
    DiagramMessage,
    DiagramNode,
    ParseIssue,
)

_COMMENT_RE = re.compile(r"^\s*%%")

# ---------------------------------------------------------------- class ---

_CLASS_DECL_RE = re.compile(r'^\s*class\s+([\w.]+)(?:\s*\[\s*"([^"]*)"\s*\])?\s*(\{)?\s*$')
_STEREOTYPE_RE = re.compile(r"^\s*<<\s*([^>]+?)\s*>>\s*$")
_CLASS_REL_RE = re.compile(
    r'^\s*([\w.]+)\s*(?:"[^"]*"\s*)?'
    r"(<\|--|--\|>|<\|\.\.|\.\.\|>|\*--|--\*|o--|--o|<--|-->|<\.\.|\.\.>|--|\.\.)"
    r'\s*(?:"[^"]*"\s*)?([\w.]+)\s*(?::\s*(.*))?$'
)
_CLASS_MEMBER_RE = re.compile(r"^\s*([\w.]+)\s*:\s*(.+)$")
_CLASS_IGNORE_RE = re.compile(
    r"^\s*(direction\s|note\s|note$|namespace\s|style\s|classDef\s|cssClass\s|click\s|callback\s|link\s|<<)", re.IGNORECASE
)

# ------------------------------------------------------------ flowchart ---

_FLOW_HEADER_RE = re.compile(r"^\s*(flowchart|graph)\b\s*(\w+)?\s*$", re.IGNORECASE)
_SUBGRAPH_RE = re.compile(r'^\s*subgraph\s+([\w.-]+)?\s*(?:\[\s*"?([^\]"]*)"?\s*\])?\s*(.*)$')
_END_RE = re.compile(r"^\s*end\s*$", re.IGNORECASE)
_FLOW_IGNORE_RE = re.compile(
    r"^\s*(style\s|classDef\s|class\s|linkStyle\s|click\s|direction\s|accTitle|accDescr|title\s)", re.IGNORECASE
)

_NODE_SHAPES = [
    (r"\(\(", r"\)\)"),
    (r"\(\[", r"\]\)"),
    (r"\[\[", r"\]\]"),
    (r"\[\(", r"\)\]"),
    (r"\{\{", r"\}\}"),
    (r"\[/", r"/\]"),
    (r"\[\\", r"\\\]"),
    (r">", r"\]"),
    (r"\{", r"\}"),
    (r"\(", r"\)"),
    (r"\[", r"\]"),
]
_NODE_RE = re.compile(
    r"\s*(?P<id>[\w.]+(?:-[\w.]+)*)"
    + "(?P<shape>"
    + "|".join(f"{o}.*?{c}" for o, c in _NODE_SHAPES)
    + ")?"
    + r"\s*"
)
_ARROW_RE = re.compile(
    r"\s*(?P<arrow><?-{2,4}>|[xo]?-{2,4}[xo]|-{3,}|-\.+->|-\.+-|<?={2,4}>|={3,}|~{3,})"
    r"(?:\s*\|(?P<label>[^|]*)\|)?\s*"
)
# "A -- label --> B" / "A -. label .-> B" / "A == label ==> B"  ->  "A -->|label| B"
_INLINE_LABEL_RE = re.compile(
    r"(--|==|-\.)\s+([^-=|<>][^-=|]*?)\s+(-{2,}>|={2,}>|\.+->|-{3,}|={3,})"
)


def _strip_label(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        text = text[1:-1]
    return text.strip()


def _shape_label(shape: str) -> str:
    for opener, closer in _NODE_SHAPES:
        o = re.compile("^" + opener)
        c = re.compile(closer + "$")
        if o.search(shape) and c.search(shape):
            inner = o.sub("", shape, count=1)
            inner = c.sub("", inner, count=1)
            return _strip_label(inner)
    return _strip_label(shape)


class _FlowchartParser:
    def __init__(self) -> None:
        self.order: list[str] = []
        self.nodes: dict[str, DiagramNode] = {}
        self.edges: list[DiagramEdge] = []
        self.issues: list[str] = []

    def declare(self, node_id: str, label: str | None = None, stereotype: str | None = None) -> None:
        node = self.nodes.get(node_id)
        if node is None:
            self.nodes[node_id] = DiagramNode(node_id, label or node_id, stereotype)
            self.order.append(node_id)
        else:
            if label and label != node_id:
                node.label = label
            if stereotype:
                node.stereotype = stereotype

    def feed(self, line: str, line_no: int) -> None:
        m = _SUBGRAPH_RE.match(line)
        if m:
            sub_id, bracket_label, rest = m.group(1), m.group(2), m.group(3)
            label = bracket_label or (rest.strip() or None)
            if sub_id is None and label:
                sub_id = label
            if sub_id:
                self.declare(sub_id, _strip_label(label) if label else None, stereotype="subgraph")
            return
        if _END_RE.match(line):
            return
        if _FLOW_IGNORE_RE.match(line):
            return
        self._parse_chain(line, line_no)

    def _parse_chain(self, line: str, line_no: int) -> None:
        line = _INLINE_LABEL_RE.sub(lambda m: f"-->|{m.group(2).strip()}|", line)
        pos = 0
        length = len(line.rstrip())
        text = line.rstrip()
        prev_group: list[str] | None = None
        pending_label: str | None = None
        while pos < length:
            group, pos = self._parse_node_group(text, pos)
            if group is None:
                self.issues.append(f"line {line_no}: unrecognized flowchart syntax: {text.strip()!r}")
                return
            if prev_group is not None:
                for src in prev_group:
                    for dst in group:
                        self.edges.append(DiagramEdge(src, dst, pending_label))
            prev_group = group
            pending_label = None
            if pos >= length:
                break
            arrow = _ARROW_RE.match(text, pos)
            if not arrow:
                self.issues.append(f"line {line_no}: unrecognized flowchart syntax: {text.strip()!r}")
                return
            label = arrow.group("label")
            pending_label = label.strip() if label is not None else None
            pos = arrow.end()

    def _parse_node_group(self, text: str, pos: int) -> tuple[list[str] | None, int]:
        group: list[str] = []
        while True:
            m = _NODE_RE.match(text, pos)
            if not m or not m.group("id"):
                return (group or None), pos
            node_id = m.group("id")
            shape = m.group("shape")
            self.declare(node_id, _shape_label(shape) if shape else None)
            group.append(node_id)
            pos = m.end()
            if pos < len(text) and text[pos] == "&":
                pos += 1
                continue
            return group, pos


def _parse_flowchart(lines: list[tuple[int, str]], raw: str) -> DiagramGraph:
    parser = _FlowchartParser()
    for line_no, line in lines[1:]:
        parser.feed(line, line_no)
    if parser.issues:
        return _opaque(raw, parser.issues)
    nodes = [parser.nodes[i] for i in parser.order]
    return DiagramGraph(DiagramKind.FLOWCHART, raw, nodes=nodes, edges=parser.edges)


def _parse_class(lines: list[tuple[int, str]], raw: str) -> DiagramGraph:
    order: list[str] = []
    nodes: dict[str, DiagramNode] = {}
    edges: list[DiagramEdge] = []
    issues: list[str] = []

    def declare(name: str, label: str | None = None) -> DiagramNode:
        node = nodes.get(name)
        if node is None:
            node = DiagramNode(name, label or name)
            nodes[name] = node
            order.append(name)
        elif label:
            node.label = label
        return node

    current: DiagramNode | None = None
    depth = 0
    for line_no, line in lines[1:]:
        stripped = line.strip()
        if not stripped:
            continue
        if depth > 0:
            if stripped == "}":
                depth -= 1
                current = None
                continue
            m = _STEREOTYPE_RE.match(stripped)
            if m and current is not None:
                current.stereotype = m.group(1)
            continue  # members are ignored
        m = _CLASS_DECL_RE.match(line)
        if m:
            node = declare(m.group(1), m.group(2))
            if m.group(3):
                depth = 1
                current = node
            continue
        m = _CLASS_REL_RE.match(line)
        if m:
            declare(m.group(1))
            declare(m.group(3))
            label = m.group(4).strip() if m.group(4) else None
            edges.append(DiagramEdge(m.group(1), m.group(3), label))
            continue
        if stripped.startswith("namespace") and stripped.endswith("{"):
            continue
        if stripped == "}":
            continue
        if _CLASS_IGNORE_RE.match(stripped):
            continue
        m = _CLASS_MEMBER_RE.match(line)
        if m:
            node = declare(m.group(1))
            sm = _STEREOTYPE_RE.match(m.group(2).strip())
            if sm:
                node.stereotype = sm.group(1)
            continue
        issues.append(f"line {line_no}: unrecognized class-diagram syntax: {stripped!r}")
    if issues:
        return _opaque(raw, issues)
    return DiagramGraph(DiagramKind.CLASS, raw, nodes=[nodes[i] for i in order], edges=edges)


# ------------------------------------------------------------- sequence ---

_SEQ_ID = r"[\w.]+(?:-[\w.]+)*"
_PARTICIPANT_RE = re.compile(rf"^\s*(participant|actor)\s+({_SEQ_ID})(?:\s+as\s+(.+?))?\s*$")
_MESSAGE_RE = re.compile(
    rf"^\s*({_SEQ_ID})\s*(-{{1,2}}(?:>>|>|x|\)))\s*[+-]?\s*({_SEQ_ID})\s*(?::\s*(.*))?$"
)
_SEQ_IGNORE_RE = re.compile(
    r"^\s*(autonumber|title\s|title$|accTitle|accDescr|activate\s|deactivate\s|[Nn]ote[\s$]|loop(\s|$)|alt(\s|$)|else(\s|$)|opt(\s|$)|par(\s|$)|and(\s|$)|rect(\s|$)|end$|box(\s|$)|critical(\s|$)|break(\s|$)|option(\s|$)|create\s|destroy\s|link\s|links\s)",
)


def _parse_sequence(lines: list[tuple[int, str]], raw: str) -> DiagramGraph:
    participants: list[str] = []
    labels: dict[str, str] = {}
    messages: list[DiagramMessage] = []
    stereo: dict[str, str] = {}
    issues: list[str] = []

    def declare(pid: str, label: str | None = None, kind: str | None = None) -> None:
        if pid not in labels:
            participants.append(pid)
            labels[pid] = label or pid
        elif label:
            labels[pid] = label
        if kind:
            stereo[pid] = kind

    for line_no, line in lines[1:]:
        stripped = line.strip()
        if not stripped:
            continue
        m = _PARTICIPANT_RE.match(line)
        if m:
            declare(m.group(2), m.group(3), m.group(1))
            continue
        m = _MESSAGE_RE.match(line)
        if m:
            src, dst = m.group(1), m.group(3)
            declare(src)
            declare(dst)
            messages.append(DiagramMessage(src, dst, (m.group(4) or "").strip()))
            continue
        if _SEQ_IGNORE_RE.match(stripped):
            continue
        issues.append(f"line {line_no}: unrecognized sequence-diagram syntax: {stripped!r}")
    if issues:
        return _opaque(raw, issues)
    nodes = [DiagramNode(p, labels[p], stereo.get(p)) for p in participants]
    return DiagramGraph(
        DiagramKind.SEQUENCE, raw, nodes=nodes, participants=participants, messages=messages
    )


def _opaque(raw: str, issues: list[str] | None = None) -> DiagramGraph:
    warnings = [
        ParseIssue("DIAGRAM_SYNTAX", issue, severity="warning") for issue in (issues or [])
    ]
    return DiagramGraph(DiagramKind.OPAQUE, raw, warnings=warnings)


def parse_diagram(body: str) -> DiagramGraph:
    """Parse one fenced diagram body. Never raises."""
    lines = [
        (i + 1, line)
        for i, line in enumerate(body.split("\n"))
        if line.strip() and not _COMMENT_RE.match(line)
    ]
    if not lines:
        return _opaque(body)
    first = lines[0][1].strip()
    try:
        if first.startswith("classDiagram"):
            return _parse_class(lines, body)
        if _FLOW_HEADER_RE.match(first):
            return _parse_flowchart(lines, body)
        if first.startswith("sequenceDiagram"):
            return _parse_sequence(lines, body)
    except Exception as exc:  # defensive: subset parser must be total
        return _opaque(body, [f"parser failure: {exc!r}"])
    return _opaque(body)


def serialize_diagram(diagram: DiagramGraph) -> str:
    """The raw text is authoritative; serialization returns it unchanged."""
    return diagram.raw
