// Session dashboard: the phase timeline plus gate and repair indicators.
// Everything here is a pure projection of the session summary.

import { SessionSummary } from "./types.js";

interface Stage {
  token: string;
  label: string;
}

const STAGES: Stage[] = [
  { token: "review-drivers", label: "Review drivers" },
  { token: "domain-model", label: "Domain model" },
  { token: "iteration-planning", label: "Iteration planning" },
  { token: "skeleton", label: "Skeleton" },
  { token: "iterating", label: "Iterating" },
  { token: "finished", label: "Finished" },
];

function stageIndex(phase: string | null): number {
  if (phase === null) return -1;
  const name = phase.startsWith("iterating:") ? "iterating" : phase;
  return STAGES.findIndex((s) => s.token === name);
}

function stageLabel(stage: Stage, session: SessionSummary): string {
  if (stage.token !== "iterating" || session.iteration === null) return stage.label;
  const of = session.plan_size === null ? "" : ` of ${session.plan_size}`;
  return `Iterating (${session.iteration}${of}, step ${session.step})`;
}

export function renderSession(el: HTMLElement, session: SessionSummary): void {
  const current = stageIndex(session.phase);

  const steps = STAGES.map((stage, index) => {
    const state = current < 0 ? "todo" : index < current ? "done" : index === current ? "current" : "todo";
    return `<li class="stage ${state}" data-phase="${stage.token}">${stageLabel(stage, session)}</li>`;
  }).join("");

  const badges: string[] = [];
  if (session.phase === null) {
    badges.push(`<span class="badge no-session">no session</span>`);
  }
  if (session.awaiting_gate) {
    badges.push(`<span class="badge awaiting-gate">awaiting gate</span>`);
  }
  if (session.repair_count > 0) {
    badges.push(`<span class="badge repairs">repairs: ${session.repair_count}</span>`);
  }
  if (session.mode !== null) {
    badges.push(`<span class="badge mode">${session.mode}</span>`);
  }
  badges.push(`<span class="badge snapshot">snapshot ${session.snapshot}</span>`);

  el.innerHTML =
    `<ol class="timeline">${steps}</ol>` +
    `<div class="badges">${badges.join("")}</div>` +
    (session.pending !== null
      ? `<div class="pending">staged: ${session.pending.staging_id}` +
        (session.pending.artifacts.length > 0 ? ` (${session.pending.artifacts.join(", ")})` : "") +
        `</div>`
      : "");
}
