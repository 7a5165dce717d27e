// Gate controls. The console never mutates session state directly; every
// decision goes through POST /api/gate, and the buttons stay disabled
// until the event stream confirms the gate was recorded.

import { ApiClient, ApiError } from "./api.js";
import { GateKind, SessionSummary } from "./types.js";

const esc = (text: string): string =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class GateForm {
  private session: SessionSummary | null = null;
  private busy = false;
  private editing = false;
  private editName: string | null = null;
  private editText = "";
  private error: string | null = null;

  constructor(
    private readonly el: HTMLElement,
    private readonly client: ApiClient,
    private readonly onSubmitted?: (session: SessionSummary) => void,
  ) {
    this.render();
  }

  update(session: SessionSummary): void {
    this.session = session;
    if (!session.awaiting_gate) {
      this.editing = false;
      this.editText = "";
      this.editName = null;
    }
    this.render();
  }

  /** event stream saw gate-recorded; it is safe to accept input again */
  confirm(): void {
    this.busy = false;
    this.error = null;
    this.render();
  }

  async submit(kind: GateKind): Promise<void> {
    if (this.busy || this.session === null) return;
    const comment = this.commentValue();
    if (kind === "reject_with_comment" && comment.trim() === "") {
      this.error = "a reject needs a comment";
      this.render();
      return;
    }
    const edits = kind === "edit_artifacts_then_approve" && this.editName !== null ? { [this.editName]: this.editText } : undefined;
    this.busy = true;
    this.error = null;
    this.render();
    try {
      const session = await this.client.gate(kind, comment, edits);
      this.session = session;
      this.editing = false;
      this.render(); // still busy: confirm() re-enables on gate-recorded
      this.onSubmitted?.(session);
    } catch (err) {
      this.busy = false;
      this.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.render();
    }
  }

  async startEdit(name: string): Promise<void> {
    if (this.session === null) return;
    try {
      const artifact = await this.client.artifact(name, true);
      this.editName = name;
      this.editText = artifact.content;
      this.editing = true;
      this.error = null;
    } catch (err) {
      this.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
    this.render();
  }

  private commentValue(): string {
    const area = this.el.querySelector<HTMLTextAreaElement>(".gate-comment");
    return area?.value ?? "";
  }

  private render(): void {
    const session = this.session;
    if (session === null || !session.awaiting_gate) {
      this.el.innerHTML = `<p class="gate-idle">no gate pending</p>`;
      return;
    }
    const pending = session.pending?.artifacts ?? [];
    const disabled = this.busy ? " disabled" : "";
    const comment = this.commentValue();

    const editPanel = this.editing
      ? `<div class="edit-panel"><div class="edit-name">${esc(this.editName ?? "")}</div>` +
        `<textarea class="gate-edit">${esc(this.editText)}</textarea></div>`
      : pending.length > 0
        ? `<div class="edit-pick">` +
          pending
            .map((name) => `<button type="button" class="load-staged" data-name="${esc(name)}"${disabled}>edit ${esc(name)}</button>`)
            .join("") +
          `</div>`
        : "";

    this.el.innerHTML =
      `<div class="gate-buttons">` +
      `<button type="button" class="gate-btn" data-kind="approve"${disabled}>approve</button>` +
      `<button type="button" class="gate-btn" data-kind="reject_with_comment"${disabled}>reject</button>` +
      (this.editing
        ? `<button type="button" class="gate-btn" data-kind="edit_artifacts_then_approve"${disabled}>approve with edits</button>`
        : "") +
      `<button type="button" class="gate-btn" data-kind="finish"${disabled}>finish</button>` +
      `</div>` +
      `<textarea class="gate-comment" placeholder="comment (required for reject)"${disabled}>${esc(comment)}</textarea>` +
      editPanel +
      (this.busy ? `<p class="gate-busy">waiting for the gate to be recorded</p>` : "") +
      (this.error !== null ? `<p class="gate-error">${esc(this.error)}</p>` : "");

    for (const btn of this.el.querySelectorAll<HTMLButtonElement>(".gate-btn")) {
      btn.addEventListener("click", () => void this.submit(btn.dataset.kind as GateKind));
    }
    for (const btn of this.el.querySelectorAll<HTMLButtonElement>(".load-staged")) {
      btn.addEventListener("click", () => void this.startEdit(btn.dataset.name!));
    }
    const area = this.el.querySelector<HTMLTextAreaElement>(".gate-edit");
    area?.addEventListener("input", () => {
      this.editText = area.value;
    });
  }
}
