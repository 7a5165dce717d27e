// Review console entry point. One page, one event stream subscription;
// the two POST endpoints are the only way anything changes on the server.

import { ApiClient } from "./api.js";
import { renderSession } from "./dashboard.js";
import { renderDiff } from "./diff.js";
import { EventSourceFactory, subscribeEvents } from "./events.js";
import { highlightElements, renderFindings } from "./findings.js";
import { GateForm } from "./gate.js";
import { renderMarkdown } from "./markdown.js";
import { ApiEvent } from "./types.js";
import { loadViewState } from "./view.js";

const DEFAULT_ARTIFACT = "Design/Architecture.md";

export interface ConsoleOptions {
  client?: ApiClient;
  eventSourceFactory?: EventSourceFactory;
  artifactName?: string;
}

const REFRESH_ON = new Set([
  "session-started",
  "phase-changed",
  "response-applied",
  "response-discarded",
  "awaiting-gate",
  "gate-recorded",
  "audit-completed",
  "plan-imported",
]);

export class Console {
  readonly client: ApiClient;
  artifactName: string;

  private readonly panes: Record<"dashboard" | "artifact" | "gate" | "diff" | "findings" | "events", HTMLElement>;
  private readonly gateForm: GateForm;
  private readonly esFactory: EventSourceFactory | undefined;
  private closeEvents: (() => void) | null = null;
  private pending: Promise<void> = Promise.resolve();
  private lastSeq = 0;
  private readonly eventLog: ApiEvent[] = [];

  constructor(root: HTMLElement, options: ConsoleOptions = {}) {
    this.client = options.client ?? new ApiClient();
    this.esFactory = options.eventSourceFactory;
    this.artifactName = options.artifactName ?? DEFAULT_ARTIFACT;

    root.innerHTML =
      `<section class="pane pane-dashboard"></section>` +
      `<section class="pane pane-gate"></section>` +
      `<div class="columns">` +
      `<section class="pane pane-artifact"></section>` +
      `<aside class="side">` +
      `<section class="pane pane-findings"></section>` +
      `<section class="pane pane-diff"></section>` +
      `<section class="pane pane-events"></section>` +
      `</aside></div>`;

    const pane = (cls: string): HTMLElement => root.querySelector<HTMLElement>(`.${cls}`)!;
    this.panes = {
      dashboard: pane("pane-dashboard"),
      artifact: pane("pane-artifact"),
      gate: pane("pane-gate"),
      diff: pane("pane-diff"),
      findings: pane("pane-findings"),
      events: pane("pane-events"),
    };
    this.gateForm = new GateForm(this.panes.gate, this.client);
  }

  async start(): Promise<void> {
    await this.refresh();
    const url = this.client.eventsUrl(this.lastSeq + 1);
    this.closeEvents = this.esFactory
      ? subscribeEvents(url, (evt) => this.handleEvent(evt), this.esFactory)
      : subscribeEvents(url, (evt) => this.handleEvent(evt));
  }

  stop(): void {
    this.closeEvents?.();
    this.closeEvents = null;
  }

  /** awaits any refresh an event kicked off; tests use this as the tick */
  settle(): Promise<void> {
    return this.pending;
  }

  handleEvent(evt: ApiEvent): void {
    if (evt.seq > this.lastSeq) this.lastSeq = evt.seq;
    this.eventLog.push(evt);
    if (this.eventLog.length > 50) this.eventLog.shift();
    this.renderEvents();
    if (evt.kind === "gate-recorded") {
      this.gateForm.confirm();
    }
    if (REFRESH_ON.has(evt.kind)) {
      this.pending = this.pending.then(() => this.refresh());
    }
  }

  async refresh(): Promise<void> {
    const view = await loadViewState(this.client, this.artifactName);
    renderSession(this.panes.dashboard, view.session);
    renderFindings(this.panes.findings, view.audit);
    this.gateForm.update(view.session);

    if (view.artifact === null) {
      this.panes.artifact.innerHTML = `<p class="artifact-missing">${this.artifactName} does not exist yet</p>`;
    } else {
      const highlight = highlightElements(view.audit);
      const warnings = view.artifact.warnings
        .map((w) => `<p class="parse-warning sev-${w.severity}">${w.code}: ${w.message}</p>`)
        .join("");
      this.panes.artifact.innerHTML =
        `<h2 class="artifact-name">${view.artifact.name}${view.artifact.staged ? " (staged)" : ""}</h2>` +
        warnings +
        `<div class="artifact-body">${renderMarkdown(view.artifact.content, { highlight })}</div>`;
    }

    if (view.artifact !== null && view.session.snapshot > 0) {
      try {
        const diff = await this.client.diff(this.artifactName, view.session.snapshot - 1, view.session.snapshot);
        renderDiff(this.panes.diff, diff);
      } catch {
        this.panes.diff.innerHTML = "";
      }
    } else {
      this.panes.diff.innerHTML = "";
    }
  }

  private renderEvents(): void {
    this.panes.events.innerHTML =
      `<ul class="event-log">` +
      this.eventLog
        .slice(-12)
        .reverse()
        .map((evt) => `<li class="event kind-${evt.kind}">#${evt.seq} ${evt.kind} @ ${evt.phase}</li>`)
        .join("") +
      `</ul>`;
  }
}

// browser bootstrap; absent under test
const rootEl = typeof document !== "undefined" ? document.getElementById("console-root") : null;
if (rootEl !== null) {
  void new Console(rootEl).start();
}
