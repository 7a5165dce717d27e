// ViewState is assembled from API responses and nothing else, so any
// reload reconstructs the same state the event stream left behind.

import { ApiClient, ApiError } from "./api.js";
import { ArtifactPayload, AuditReport, SessionSummary } from "./types.js";

export interface ViewState {
  session: SessionSummary;
  artifact: ArtifactPayload | null;
  audit: AuditReport;
}

export async function loadViewState(
  client: ApiClient,
  artifactName: string,
  staged = false,
): Promise<ViewState> {
  const [session, audit] = await Promise.all([client.session(), client.audit()]);
  let artifact: ArtifactPayload | null = null;
  try {
    artifact = await client.artifact(artifactName, staged);
  } catch (err) {
    if (!(err instanceof ApiError && err.code === "NOT_FOUND")) throw err;
  }
  return { session, artifact, audit };
}
