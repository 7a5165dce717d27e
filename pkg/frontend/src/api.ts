import type {
  ArtifactPayload,
  AuditReport,
  DiffPayload,
  GateKind,
  SessionSummary,
  StepOutcome,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin client over the addflow HTTP API. The fetch implementation is
 * injectable so tests can serve canned fixture payloads.
 */
export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async session(): Promise<SessionSummary> {
    return this.get("/api/session");
  }

  async artifact(name: string, staged = false): Promise<ArtifactPayload> {
    const suffix = staged ? "?staged=true" : "";
    return this.get(`/api/artifacts/${name}${suffix}`);
  }

  async diff(name: string, from: number, to: number): Promise<DiffPayload> {
    return this.get(`/api/artifacts/${name}/diff?from=${from}&to=${to}`);
  }

  async audit(): Promise<AuditReport> {
    return this.get("/api/audit");
  }

  async gate(
    kind: GateKind,
    comment = "",
    edits?: Record<string, string>,
  ): Promise<SessionSummary> {
    return this.post("/api/gate", { kind, comment, edits: edits ?? null });
  }

  async advance(): Promise<{ session: SessionSummary; outcome: StepOutcome }> {
    return this.post("/api/advance", null);
  }

  eventsUrl(fromSeq = 1): string {
    return `${this.base}/api/events?from=${fromSeq}`;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    return this.unwrap(response);
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: body === null ? null : JSON.stringify(body),
    });
    return this.unwrap(response);
  }

  private async unwrap<T>(response: Response): Promise<T> {
    if (response.ok) {
      return (await response.json()) as T;
    }
    let code = "HTTP_ERROR";
    let message = `request failed with status ${response.status}`;
    try {
      const body = await response.json();
      if (body && typeof body.code === "string") code = body.code;
      if (body && typeof body.message === "string") message = body.message;
    } catch {
      // non-JSON error body, keep the generic message
    }
    throw new ApiError(code, message, response.status);
  }
}
