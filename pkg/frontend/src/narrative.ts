/** Narrative panel: final text, unverified flag, expandable critic trail,
 * and accept/correct feedback actions.
 *
 * After a successful correction the panel always re-fetches from the
 * service — the UI never keeps stale narrative text. On POST failure the
 * optimistic state is rolled back and the error surfaced.
 */

import type { ApiClient } from "./client.js";
import { ServiceError } from "./client.js";
import type { NarrativeView } from "./types.js";

export interface NarrativePanelOptions {
  onError(message: string): void;
  now?: () => number;
  makeId?: () => string;
}

export class NarrativePanel {
  private current: NarrativeView | null = null;
  private trailExpanded = false;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    private container: HTMLElement,
    private client: ApiClient,
    private opts: NarrativePanelOptions,
  ) {}

  get narrative(): NarrativeView | null {
    return this.current;
  }

  /** Feedback POSTs are serialized behind any in-flight one. */
  whenIdle(): Promise<void> {
    return this.pending;
  }

  async show(txId: string): Promise<void> {
    try {
      this.current = await this.client.getNarrative(txId);
    } catch (err) {
      this.current = null;
      this.container.textContent = "";
      this.opts.onError(
        err instanceof ServiceError && err.status === 404
          ? `no narrative for ${txId}`
          : String(err),
      );
      return;
    }
    this.render();
  }

  accept(): Promise<void> {
    return this.submit(true, undefined);
  }

  correct(correctedText: string): Promise<void> {
    return this.submit(false, correctedText);
  }

  private submit(ok: boolean, correctedText: string | undefined): Promise<void> {
    const view = this.current;
    if (view === null) return Promise.resolve();
    const run = async () => {
      const before = view.text;
      if (correctedText !== undefined) {
        view.text = correctedText; // optimistic
        this.render();
      }
      try {
        await this.client.postFeedback({
          feedback_id: (this.opts.makeId ?? defaultId)(),
          tx_id: view.tx_id,
          narrative_ok: ok,
          corrected_text: correctedText,
          note: "",
          created_ts: Math.floor((this.opts.now ?? Date.now)() / 1000),
        });
      } catch (err) {
        view.text = before; // rollback
        this.render();
        this.opts.onError(String(err));
        return;
      }
      await this.show(view.tx_id); // refresh from the service
    };
    this.pending = this.pending.then(run);
    return this.pending;
  }

  private render(): void {
    const view = this.current;
    this.container.textContent = "";
    if (view === null) return;

    const text = document.createElement("pre");
    text.className = "narrative-text";
    text.textContent = view.text;
    this.container.appendChild(text);

    if (view.flags.includes("unverified")) {
      const flag = document.createElement("span");
      flag.className = "flag unverified";
      flag.textContent = "unverified";
      this.container.appendChild(flag);
    }

    const trail = document.createElement("details");
    trail.className = "critic-trail";
    trail.open = this.trailExpanded;
    trail.addEventListener("toggle", () => {
      this.trailExpanded = trail.open;
    });
    const summary = document.createElement("summary");
    summary.textContent = `critic trail (${view.rounds.length} rounds)`;
    trail.appendChild(summary);
    for (const [draft, critiqueText, verdict] of view.rounds) {
      const round = document.createElement("div");
      round.className = "critic-round";
      round.dataset.verdict = verdict;
      const d = document.createElement("pre");
      d.textContent = draft;
      const c = document.createElement("p");
      c.textContent = `${verdict}: ${critiqueText}`;
      round.append(d, c);
      trail.appendChild(round);
    }
    this.container.appendChild(trail);

    if (view.versions.length > 0) {
      const versions = document.createElement("p");
      versions.className = "version-note";
      versions.textContent = `${view.versions.length} earlier version(s)`;
      this.container.appendChild(versions);
    }

    const actions = document.createElement("div");
    actions.className = "feedback-actions";
    const acceptBtn = document.createElement("button");
    acceptBtn.className = "accept";
    acceptBtn.textContent = "Accept";
    acceptBtn.addEventListener("click", () => void this.accept());
    const correctBtn = document.createElement("button");
    correctBtn.className = "correct";
    correctBtn.textContent = "Correct";
    correctBtn.addEventListener("click", () => this.openEditor(actions));
    actions.append(acceptBtn, correctBtn);
    this.container.appendChild(actions);
  }

  private openEditor(actions: HTMLElement): void {
    if (actions.querySelector("textarea") !== null) return;
    const editor = document.createElement("textarea");
    editor.className = "correction-editor";
    editor.value = this.current?.text ?? "";
    const send = document.createElement("button");
    send.className = "send-correction";
    send.textContent = "Submit correction";
    send.addEventListener("click", () => void this.correct(editor.value));
    actions.append(editor, send);
  }
}

function defaultId(): string {
  return `fb-${Date.now()}-${Math.floor(Math.random() * 1e9)}`;
}
