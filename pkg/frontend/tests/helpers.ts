// Shared test plumbing: fixture loading, a recording fetch stub and a
// hand-driven EventSource stand-in. All fixtures are captured payloads
// from a live server, not hand-written approximations.

import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type { EventSourceLike } from "../src/events.js";
import type { ApiEvent } from "../src/types.js";

// vitest runs from the frontend directory; import.meta.url is not a file
// url under the jsdom environment, so resolve from cwd instead
export function fixture<T>(name: string): T {
  const path = resolve(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

type RouteResult = { status?: number; body: unknown } | undefined;

/** fetch stub: handler maps a request to a canned JSON response */
export function fakeFetch(handler: (url: string, init?: RequestInit) => RouteResult) {
  const calls: RecordedCall[] = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : null,
    });
    const result = handler(url, init);
    if (result === undefined) {
      return new Response(JSON.stringify({ code: "NOT_FOUND", message: `no route for ${url}` }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(JSON.stringify(result.body), {
      status: result.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { impl, calls };
}

export class FakeEventSource implements EventSourceLike {
  private readonly listeners = new Map<string, ((evt: MessageEvent) => void)[]>();
  closed = false;
  onerror: ((evt: Event) => void) | null = null;

  constructor(readonly url: string) {}

  addEventListener(type: string, listener: (evt: MessageEvent) => void): void {
    const existing = this.listeners.get(type) ?? [];
    existing.push(listener);
    this.listeners.set(type, existing);
  }

  close(): void {
    this.closed = true;
  }

  emit(kind: string, event: ApiEvent): void {
    for (const listener of this.listeners.get(kind) ?? []) {
      listener({ data: JSON.stringify(event) } as MessageEvent);
    }
  }
}

let seqCounter = 0;

export function apiEvent(kind: string, phase: string, payload: Record<string, unknown> = {}): ApiEvent {
  seqCounter += 1;
  return { seq: seqCounter, kind, phase, timestamp: "2026-01-01T00:00:00+00:00", payload };
}
