// Shapes served by the addflow HTTP API. The console derives every piece
// of view state from these; nothing here is invented client-side.

export interface SessionSummary {
  phase: string | null;
  display: string | null;
  iteration: number | null;
  step: number | null;
  finished: boolean;
  awaiting_gate: boolean;
  repair_count: number;
  mode: string | null;
  plan_size: number | null;
  snapshot: number;
  pending: { staging_id: string; artifacts: string[] } | null;
}

export interface ParseWarning {
  code: string;
  message: string;
  severity: string;
  location: string | null;
}

export interface ArtifactPayload {
  name: string;
  content: string;
  staged: boolean;
  warnings: ParseWarning[];
}

export interface DiffHunk {
  old_start: number;
  new_start: number;
  old_lines: string[];
  new_lines: string[];
  section: string | null;
}

export interface DiffPayload {
  artifact: string;
  from: number;
  to: number;
  empty: boolean;
  hunks: DiffHunk[];
}

export interface Finding {
  rule: string;
  severity: string;
  message: string;
  artifact: string | null;
  section: string | null;
  element: string | null;
  repairable: boolean;
}

export interface AuditReport {
  scope: string;
  findings: Finding[];
  skipped: { rule: string; reason: string }[];
  exit_code: number;
  load_issues: string[];
}

export interface StepOutcome {
  staging_id: string | null;
  artifacts: string[];
  commentary: string;
  needs_repair: boolean;
  findings: Finding[];
}

export interface ApiEvent {
  seq: number;
  kind: string;
  phase: string | null;
  timestamp: string | null;
  payload: Record<string, unknown>;
}

export type GateKind = "approve" | "reject_with_comment" | "edit_artifacts_then_approve" | "finish";
