// Client-side SVG rendering of the three fenced diagram dialects the
// design documents use. The server never rasterizes anything; it hands
// over raw fenced blocks and this module draws them.

export interface RenderedDiagram {
  kind: "flowchart" | "sequence" | "class" | "unknown";
  svg: string | null;
  warnings: string[];
}

export interface DiagramOptions {
  /** participant ids or labels to mark (audit findings point at these) */
  highlight?: Set<string>;
}

const esc = (text: string): string =>
  text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");

export function renderDiagram(source: string, options: DiagramOptions = {}): RenderedDiagram {
  const lines = source.split("\n");
  const first = (lines.find((l) => l.trim() !== "") ?? "").trim();
  if (/^(flowchart|graph)\b/.test(first)) {
    return renderFlowchart(lines);
  }
  if (/^sequenceDiagram\b/.test(first)) {
    return renderSequence(lines, options);
  }
  if (/^classDiagram\b/.test(first)) {
    return renderClass(lines);
  }
  return {
    kind: "unknown",
    svg: null,
    warnings: [`unsupported diagram kind: ${first.split(/\s/)[0] || "(empty)"}`],
  };
}

// ---------------------------------------------------------------- flowchart

interface FlowNode {
  id: string;
  label: string;
  shape: "box" | "db" | "round";
  group: string | null;
}

interface FlowEdge {
  from: string;
  to: string;
  label: string | null;
}

const NODE_DEF = /^([A-Za-z][\w-]*)(?:\[\(([^)]*)\)\]|\[([^\]]*)\]|\(\(([^)]*)\)\))?$/;
const EDGE_RE = /^(.*?)\s*-->(?:\|([^|]*)\|)?\s*(.*)$/;

function renderFlowchart(lines: string[]): RenderedDiagram {
  const warnings: string[] = [];
  const nodes = new Map<string, FlowNode>();
  const edges: FlowEdge[] = [];
  const groups = new Map<string, { label: string; members: string[] }>();
  let currentGroup: string | null = null;

  const ensureNode = (raw: string): string | null => {
    const m = NODE_DEF.exec(raw.trim());
    if (!m) return null;
    const id = m[1]!;
    const label = m[2] ?? m[3] ?? m[4];
    const shape = m[2] !== undefined ? "db" : m[4] !== undefined ? "round" : "box";
    const known = nodes.get(id);
    if (known) {
      if (label !== undefined) {
        known.label = label;
        known.shape = shape;
      }
      if (known.group === null && currentGroup !== null) {
        known.group = currentGroup;
        groups.get(currentGroup)!.members.push(id);
      }
    } else {
      nodes.set(id, { id, label: label ?? id, shape: label !== undefined ? shape : "box", group: currentGroup });
      if (currentGroup !== null) groups.get(currentGroup)!.members.push(id);
    }
    return id;
  };

  for (const rawLine of lines) {
    const line = rawLine.trim();
    if (line === "" || /^(flowchart|graph)\b/.test(line) || line.startsWith("%%")) continue;
    if (line === "end") {
      currentGroup = null;
      continue;
    }
    const sub = /^subgraph\s+([\w-]+)(?:\[([^\]]*)\])?/.exec(line);
    if (sub) {
      currentGroup = sub[1]!;
      groups.set(currentGroup, { label: sub[2] ?? sub[1]!, members: [] });
      continue;
    }
    const edge = EDGE_RE.exec(line);
    if (edge) {
      const from = ensureNode(edge[1]!);
      const to = ensureNode(edge[3]!);
      if (from === null || to === null) {
        warnings.push(`cannot read edge: ${line}`);
        continue;
      }
      edges.push({ from, to, label: edge[2]?.trim() || null });
      continue;
    }
    if (ensureNode(line) === null) {
      warnings.push(`cannot read line: ${line}`);
    }
  }

  if (nodes.size === 0) {
    return { kind: "flowchart", svg: null, warnings: [...warnings, "flowchart has no nodes"] };
  }

  // longest-path layering so arrows flow downward
  const depth = new Map<string, number>();
  for (const id of nodes.keys()) depth.set(id, 0);
  for (let pass = 0; pass < nodes.size; pass++) {
    let changed = false;
    for (const e of edges) {
      const want = depth.get(e.from)! + 1;
      if (e.from !== e.to && depth.get(e.to)! < want && want < nodes.size + 1) {
        depth.set(e.to, want);
        changed = true;
      }
    }
    if (!changed) break;
  }

  const rows = new Map<number, FlowNode[]>();
  for (const node of nodes.values()) {
    const d = depth.get(node.id)!;
    if (!rows.has(d)) rows.set(d, []);
    rows.get(d)!.push(node);
  }
  // keep grouped nodes adjacent within their row
  for (const row of rows.values()) {
    row.sort((a, b) => (a.group ?? "~").localeCompare(b.group ?? "~"));
  }

  const boxW = (n: FlowNode) => Math.max(72, n.label.length * 7 + 18);
  const rowH = 84;
  const gap = 22;
  const pos = new Map<string, { x: number; y: number; w: number }>();
  let width = 0;
  const rowKeys = [...rows.keys()].sort((a, b) => a - b);
  for (const d of rowKeys) {
    const row = rows.get(d)!;
    let x = gap;
    for (const node of row) {
      const w = boxW(node);
      pos.set(node.id, { x, y: 40 + d * rowH, w });
      x += w + gap;
    }
    width = Math.max(width, x);
  }
  const height = 40 + rowKeys.length * rowH;

  const parts: string[] = [];
  for (const [gid, group] of groups) {
    const boxes = group.members.map((id) => pos.get(id)!).filter(Boolean);
    if (boxes.length === 0) continue;
    const x0 = Math.min(...boxes.map((b) => b.x)) - 10;
    const y0 = Math.min(...boxes.map((b) => b.y)) - 26;
    const x1 = Math.max(...boxes.map((b) => b.x + b.w)) + 10;
    const y1 = Math.max(...boxes.map((b) => b.y)) + 40;
    parts.push(
      `<g class="subgraph" data-id="${esc(gid)}">` +
        `<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" rx="6"/>` +
        `<text x="${x0 + 8}" y="${y0 + 16}">${esc(group.label)}</text></g>`,
    );
  }
  for (const e of edges) {
    const a = pos.get(e.from)!;
    const b = pos.get(e.to)!;
    const x1 = a.x + a.w / 2;
    const y1 = a.y + 32;
    const x2 = b.x + b.w / 2;
    const y2 = b.y;
    parts.push(
      `<g class="edge"><line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" marker-end="url(#arrow)"/>` +
        (e.label
          ? `<text x="${(x1 + x2) / 2}" y="${(y1 + y2) / 2 - 4}">${esc(e.label)}</text>`
          : "") +
        `</g>`,
    );
  }
  for (const node of nodes.values()) {
    const p = pos.get(node.id)!;
    const rx = node.shape === "box" ? 3 : 14;
    parts.push(
      `<g class="node shape-${node.shape}" data-id="${esc(node.id)}">` +
        `<rect x="${p.x}" y="${p.y}" width="${p.w}" height="32" rx="${rx}"/>` +
        `<text x="${p.x + p.w / 2}" y="${p.y + 20}" text-anchor="middle">${esc(node.label)}</text></g>`,
    );
  }

  return { kind: "flowchart", svg: wrap(width, height, parts), warnings };
}

// ----------------------------------------------------------------- sequence

const PARTICIPANT_RE = /^(?:participant|actor)\s+([\w-]+)(?:\s+as\s+(.+))?$/;
const MESSAGE_RE = /^([\w-]+)\s*(-{1,2}(?:>>|>|x))\s*([\w-]+)\s*:\s*(.*)$/;

function renderSequence(lines: string[], options: DiagramOptions): RenderedDiagram {
  const warnings: string[] = [];
  const order: string[] = [];
  const labels = new Map<string, string>();
  const messages: { from: string; to: string; text: string }[] = [];

  const ensure = (id: string) => {
    if (!labels.has(id)) {
      labels.set(id, id);
      order.push(id);
    }
  };

  for (const rawLine of lines) {
    const line = rawLine.trim();
    if (line === "" || line === "sequenceDiagram" || line.startsWith("%%")) continue;
    const p = PARTICIPANT_RE.exec(line);
    if (p) {
      ensure(p[1]!);
      if (p[2]) labels.set(p[1]!, p[2].trim());
      continue;
    }
    const m = MESSAGE_RE.exec(line);
    if (m) {
      ensure(m[1]!);
      ensure(m[3]!);
      messages.push({ from: m[1]!, to: m[3]!, text: m[4]! });
      continue;
    }
    // notes, activations and loops are legal input we simply do not draw
    if (!/^(note|activate|deactivate|loop|alt|else|opt|par|and)\b/i.test(line)) {
      warnings.push(`cannot read line: ${line}`);
    }
  }

  if (order.length === 0) {
    return { kind: "sequence", svg: null, warnings: [...warnings, "sequence diagram has no participants"] };
  }

  const colW = Math.max(120, ...order.map((id) => labels.get(id)!.length * 7 + 30));
  const topY = 12;
  const msgTop = topY + 54;
  const stepH = 30;
  const height = msgTop + messages.length * stepH + 30;
  const width = order.length * colW + 20;
  const centerX = (id: string) => order.indexOf(id) * colW + colW / 2 + 10;
  const highlight = options.highlight ?? new Set<string>();

  const parts: string[] = [];
  for (const id of order) {
    const label = labels.get(id)!;
    const x = centerX(id);
    const marked = highlight.has(id) || highlight.has(label);
    parts.push(
      `<line class="lifeline" x1="${x}" y1="${topY + 36}" x2="${x}" y2="${height - 10}"/>`,
      `<g class="participant${marked ? " highlight" : ""}" data-id="${esc(id)}">` +
        `<rect x="${x - colW / 2 + 12}" y="${topY}" width="${colW - 24}" height="34" rx="4"/>` +
        `<text x="${x}" y="${topY + 22}" text-anchor="middle">${esc(label)}</text></g>`,
    );
  }
  messages.forEach((msg, index) => {
    const y = msgTop + index * stepH;
    const x1 = centerX(msg.from);
    const x2 = centerX(msg.to);
    if (msg.from === msg.to) {
      parts.push(
        `<g class="message self"><path d="M ${x1} ${y} h 32 v 12 h -32" fill="none" marker-end="url(#arrow)"/>` +
          `<text x="${x1 + 38}" y="${y + 10}">${esc(msg.text)}</text></g>`,
      );
    } else {
      parts.push(
        `<g class="message"><line x1="${x1}" y1="${y}" x2="${x2}" y2="${y}" marker-end="url(#arrow)"/>` +
          `<text x="${(x1 + x2) / 2}" y="${y - 5}" text-anchor="middle">${esc(msg.text)}</text></g>`,
      );
    }
  });

  return { kind: "sequence", svg: wrap(width, height, parts), warnings };
}

// -------------------------------------------------------------------- class

function renderClass(lines: string[]): RenderedDiagram {
  const warnings: string[] = [];
  const names: string[] = [];
  const edges: { from: string; to: string }[] = [];
  let inBody = false;

  const ensure = (name: string) => {
    if (!names.includes(name)) names.push(name);
  };

  for (const rawLine of lines) {
    const line = rawLine.trim();
    if (line === "" || line === "classDiagram" || line.startsWith("%%")) continue;
    if (inBody) {
      if (line === "}") inBody = false;
      continue; // members are listed in the element table instead
    }
    const cls = /^class\s+([\w-]+)\s*(\{)?$/.exec(line);
    if (cls) {
      ensure(cls[1]!);
      inBody = cls[2] === "{";
      continue;
    }
    const rel = /^([\w-]+)\s+(?:--|-->|<\|--|o--|\*--|\.\.>)\s+([\w-]+)/.exec(line);
    if (rel) {
      ensure(rel[1]!);
      ensure(rel[2]!);
      edges.push({ from: rel[1]!, to: rel[2]! });
      continue;
    }
    warnings.push(`cannot read line: ${line}`);
  }

  if (names.length === 0) {
    return { kind: "class", svg: null, warnings: [...warnings, "class diagram has no classes"] };
  }

  const perRow = 4;
  const boxW = Math.max(100, ...names.map((n) => n.length * 8 + 24));
  const boxH = 36;
  const center = new Map<string, { x: number; y: number }>();
  names.forEach((name, index) => {
    const col = index % perRow;
    const row = Math.floor(index / perRow);
    center.set(name, { x: 16 + col * (boxW + 28) + boxW / 2, y: 16 + row * (boxH + 44) + boxH / 2 });
  });
  const rowsUsed = Math.ceil(names.length / perRow);
  const width = 16 + Math.min(names.length, perRow) * (boxW + 28);
  const height = 16 + rowsUsed * (boxH + 44);

  const parts: string[] = [];
  for (const e of edges) {
    const a = center.get(e.from)!;
    const b = center.get(e.to)!;
    parts.push(`<line class="edge" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)"/>`);
  }
  for (const name of names) {
    const c = center.get(name)!;
    parts.push(
      `<g class="node" data-id="${esc(name)}">` +
        `<rect x="${c.x - boxW / 2}" y="${c.y - boxH / 2}" width="${boxW}" height="${boxH}" rx="2"/>` +
        `<text x="${c.x}" y="${c.y + 5}" text-anchor="middle">${esc(name)}</text></g>`,
    );
  }

  return { kind: "class", svg: wrap(width, height, parts), warnings };
}

function wrap(width: number, height: number, parts: string[]): string {
  return (
    `<svg class="diagram" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" role="img">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>` +
    parts.join("") +
    `</svg>`
  );
}
