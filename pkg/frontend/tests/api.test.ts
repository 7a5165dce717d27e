import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { SessionSummary } from "../src/types.js";
import { fakeFetch, fixture } from "./helpers.js";

const session = fixture<SessionSummary>("session-awaiting.json");

describe("ApiClient", () => {
  it("reads the session summary", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: session }));
    const client = new ApiClient("", impl);
    const got = await client.session();
    expect(got.phase).toBe("review-drivers");
    expect(got.awaiting_gate).toBe(true);
    expect(calls).toEqual([{ url: "/api/session", method: "GET", body: null }]);
  });

  it("asks for staged artifact content with a query flag", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: { name: "Design/Architecture.md", content: "", staged: true, warnings: [] } }));
    const client = new ApiClient("", impl);
    await client.artifact("Design/Architecture.md", true);
    expect(calls[0]!.url).toBe("/api/artifacts/Design/Architecture.md?staged=true");
    await client.artifact("Design/Architecture.md");
    expect(calls[1]!.url).toBe("/api/artifacts/Design/Architecture.md");
  });

  it("builds diff urls from the snapshot pair", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: fixture("diff.json") }));
    const client = new ApiClient("", impl);
    const diff = await client.diff("Design/Architecture.md", 4, 40);
    expect(calls[0]!.url).toBe("/api/artifacts/Design/Architecture.md/diff?from=4&to=40");
    expect(diff.hunks).toHaveLength(6);
  });

  it("posts gates with comment and null edits by default", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: session }));
    const client = new ApiClient("", impl);
    await client.gate("approve");
    expect(calls[0]).toEqual({
      url: "/api/gate",
      method: "POST",
      body: { kind: "approve", comment: "", edits: null },
    });
  });

  it("carries edited artifact text in the gate payload", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: session }));
    const client = new ApiClient("", impl);
    await client.gate("edit_artifacts_then_approve", "tightened wording", {
      "Design/Architecture.md": "# Architecture\n",
    });
    expect(calls[0]!.body).toEqual({
      kind: "edit_artifacts_then_approve",
      comment: "tightened wording",
      edits: { "Design/Architecture.md": "# Architecture\n" },
    });
  });

  it("posts advance with an empty body", async () => {
    const { impl, calls } = fakeFetch(() => ({
      body: { session, outcome: { staging_id: null, artifacts: [], commentary: "", needs_repair: false, findings: [] } },
    }));
    const client = new ApiClient("", impl);
    await client.advance();
    expect(calls[0]!.method).toBe("POST");
    expect(calls[0]!.body).toBeNull();
  });

  it("maps error payloads onto ApiError", async () => {
    const { impl } = fakeFetch(() => ({
      status: 409,
      body: { code: "NOT_AWAITING_GATE", message: "no gate is pending" },
    }));
    const client = new ApiClient("", impl);
    const err = await client.gate("approve").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).code).toBe("NOT_AWAITING_GATE");
    expect((err as ApiError).message).toBe("no gate is pending");
    expect((err as ApiError).status).toBe(409);
  });

  it("keeps a generic code when the error body is not the API shape", async () => {
    const impl = async () => new Response("boom", { status: 500 });
    const client = new ApiClient("", impl);
    const err = await client.session().catch((e: unknown) => e);
    expect((err as ApiError).code).toBe("HTTP_ERROR");
    expect((err as ApiError).status).toBe(500);
  });

  it("prefixes every path with the configured base", async () => {
    const { impl, calls } = fakeFetch(() => ({ body: session }));
    const client = new ApiClient("http://127.0.0.1:7843", impl);
    await client.session();
    expect(calls[0]!.url).toBe("http://127.0.0.1:7843/api/session");
    expect(client.eventsUrl(7)).toBe("http://127.0.0.1:7843/api/events?from=7");
  });
});
