// Audit panel. Renders the findings list and exposes the set of element
// names other panes use to highlight diagram participants.

import { AuditReport, Finding } from "./types.js";

const esc = (text: string): string =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function highlightElements(report: AuditReport): Set<string> {
  const names = new Set<string>();
  for (const finding of report.findings) {
    if (finding.element !== null) names.add(finding.element);
  }
  return names;
}

function findingRow(finding: Finding): string {
  const where = [finding.artifact, finding.section].filter((part) => part !== null).join(" / ");
  return (
    `<li class="finding sev-${finding.severity}" data-rule="${esc(finding.rule)}">` +
    `<span class="rule">${esc(finding.rule)}</span>` +
    `<span class="severity">${finding.severity}</span>` +
    (finding.element !== null ? `<strong class="element">${esc(finding.element)}</strong>` : "") +
    `<span class="message">${esc(finding.message)}</span>` +
    (where !== "" ? `<span class="location">${esc(where)}</span>` : "") +
    (finding.repairable ? `<span class="repairable">repairable</span>` : "") +
    `</li>`
  );
}

export function renderFindings(el: HTMLElement, report: AuditReport, severity?: string): void {
  const shown = severity === undefined ? report.findings : report.findings.filter((f) => f.severity === severity);

  const head =
    `<div class="audit-head">scope: ${esc(report.scope)}, exit ${report.exit_code}, ` +
    `${report.findings.length} finding${report.findings.length === 1 ? "" : "s"}</div>`;

  const list =
    shown.length === 0
      ? `<p class="audit-clean">no findings</p>`
      : `<ul class="findings">${shown.map(findingRow).join("")}</ul>`;

  const skipped =
    report.skipped.length === 0
      ? ""
      : `<ul class="skipped">` +
        report.skipped.map((s) => `<li>${esc(s.rule)} skipped: ${esc(s.reason)}</li>`).join("") +
        `</ul>`;

  const issues =
    report.load_issues.length === 0
      ? ""
      : `<ul class="load-issues">` + report.load_issues.map((issue) => `<li>${esc(issue)}</li>`).join("") + `</ul>`;

  el.innerHTML = head + list + skipped + issues;
}
