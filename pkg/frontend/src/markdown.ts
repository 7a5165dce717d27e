// Minimal markdown-to-HTML for the design documents. The documents are
// machine-written against a fixed template, so this covers exactly the
// constructs that template emits: ATX headings, pipe tables, fenced code
// blocks (diagram fences drawn as SVG), bullet lists and paragraphs.

import { renderDiagram, DiagramOptions } from "./diagrams.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** bold and inline code only; the template uses nothing fancier */
function inline(text: string): string {
  let out = escapeHtml(text);
  out = out.replace(/`([^`]+)`/g, "<code>$1</code>");
  out = out.replace(/\*\*([^*]+)\*\*/g, "<strong>$1</strong>");
  return out;
}

function tableRow(line: string, tag: "th" | "td"): string {
  const cells = line
    .replace(/^\s*\|/, "")
    .replace(/\|\s*$/, "")
    .split("|")
    .map((cell) => `<${tag}>${inline(cell.trim())}</${tag}>`);
  return `<tr>${cells.join("")}</tr>`;
}

const isSeparatorRow = (line: string): boolean => /^\s*\|?[\s:|-]+\|?\s*$/.test(line) && line.includes("-");

export function renderMarkdown(source: string, diagramOptions: DiagramOptions = {}): string {
  const lines = source.split("\n");
  const out: string[] = [];
  let i = 0;

  while (i < lines.length) {
    const line = lines[i]!;
    const trimmed = line.trim();

    if (trimmed === "") {
      i++;
      continue;
    }

    const heading = /^(#{1,6})\s+(.*)$/.exec(trimmed);
    if (heading) {
      const level = heading[1]!.length;
      out.push(`<h${level}>${inline(heading[2]!)}</h${level}>`);
      i++;
      continue;
    }

    const fence = /^```(\S*)\s*$/.exec(trimmed);
    if (fence) {
      const lang = fence[1]!;
      const body: string[] = [];
      i++;
      while (i < lines.length && lines[i]!.trim() !== "```") {
        body.push(lines[i]!);
        i++;
      }
      i++; // closing fence
      const code = body.join("\n");
      if (lang === "mermaid") {
        const drawn = renderDiagram(code, diagramOptions);
        if (drawn.svg !== null) {
          out.push(`<figure class="diagram-block" data-kind="${drawn.kind}">${drawn.svg}</figure>`);
        } else {
          out.push(`<pre class="diagram-source"><code>${escapeHtml(code)}</code></pre>`);
        }
        for (const warning of drawn.warnings) {
          out.push(`<p class="diagram-warning">${escapeHtml(warning)}</p>`);
        }
      } else {
        out.push(`<pre><code>${escapeHtml(code)}</code></pre>`);
      }
      continue;
    }

    if (trimmed.startsWith("|")) {
      const rows: string[] = [];
      while (i < lines.length && lines[i]!.trim().startsWith("|")) {
        rows.push(lines[i]!);
        i++;
      }
      const head = rows[0]!;
      const bodyRows = rows.length > 1 && isSeparatorRow(rows[1]!) ? rows.slice(2) : rows.slice(1);
      out.push(
        `<table><thead>${tableRow(head, "th")}</thead><tbody>` +
          bodyRows.map((row) => tableRow(row, "td")).join("") +
          `</tbody></table>`,
      );
      continue;
    }

    if (trimmed.startsWith("- ")) {
      const items: string[] = [];
      while (i < lines.length && lines[i]!.trim().startsWith("- ")) {
        items.push(`<li>${inline(lines[i]!.trim().slice(2))}</li>`);
        i++;
      }
      out.push(`<ul>${items.join("")}</ul>`);
      continue;
    }

    // paragraph: run until a blank line or a structural opener
    const para: string[] = [trimmed];
    i++;
    while (i < lines.length) {
      const next = lines[i]!.trim();
      if (next === "" || next.startsWith("#") || next.startsWith("|") || next.startsWith("- ") || next.startsWith("```")) {
        break;
      }
      para.push(next);
      i++;
    }
    out.push(`<p>${inline(para.join(" "))}</p>`);
  }

  return out.join("\n");
}
