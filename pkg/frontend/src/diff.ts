// Section-annotated diff viewer. The server computes the hunks; this
// module only lays them out.

import { DiffPayload } from "./types.js";

const esc = (text: string): string =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderDiff(el: HTMLElement, diff: DiffPayload): void {
  if (diff.empty) {
    el.innerHTML = `<p class="diff-empty">no changes between snapshot ${diff.from} and ${diff.to}</p>`;
    return;
  }
  const blocks = diff.hunks.map((hunk) => {
    const lines: string[] = [];
    for (const line of hunk.old_lines) {
      lines.push(`<div class="line removed">- ${esc(line)}</div>`);
    }
    for (const line of hunk.new_lines) {
      lines.push(`<div class="line added">+ ${esc(line)}</div>`);
    }
    const section = hunk.section === null ? "(preamble)" : hunk.section;
    return (
      `<div class="hunk">` +
      `<div class="hunk-header"><span class="section">${esc(section)}</span>` +
      `<span class="range">@ ${hunk.old_start} / ${hunk.new_start}</span></div>` +
      lines.join("") +
      `</div>`
    );
  });
  el.innerHTML =
    `<div class="diff-title">${esc(diff.artifact)}: snapshot ${diff.from} to ${diff.to}</div>` + blocks.join("");
}
