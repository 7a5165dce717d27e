import type { ApiEvent } from "./types.js";

// Every kind the journal emits over SSE. Names double as SSE event names.
export const EVENT_KINDS = [
  "session-started",
  "phase-changed",
  "prompt-sent",
  "response-applied",
  "response-discarded",
  "awaiting-gate",
  "gate-recorded",
  "audit-completed",
  "plan-imported",
] as const;

export type EventHandler = (event: ApiEvent) => void;

export interface EventSourceLike {
  addEventListener(type: string, listener: (evt: MessageEvent) => void): void;
  close(): void;
  onerror: ((evt: Event) => void) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

/**
 * Subscribe to the session event stream. The handler sees every event in
 * journal order; reconnects are the browser EventSource's business (the
 * server sends retry + id so Last-Event-ID resumes cleanly).
 */
export function subscribeEvents(
  url: string,
  handler: EventHandler,
  makeSource: EventSourceFactory = (u) => new EventSource(u),
): () => void {
  const source = makeSource(url);
  for (const kind of EVENT_KINDS) {
    source.addEventListener(kind, (evt) => {
      handler(JSON.parse(evt.data) as ApiEvent);
    });
  }
  return () => source.close();
}
