/** Candidate picker for an ambiguous utterance: selecting an entry
 * previews its plan, confirming commits it. One selection at a time,
 * no further picks once confirmed.
 */
import type { CandidateJson } from "./types.js";

export interface PickerHooks {
  onPreview(candidate: CandidateJson): void;
  onConfirm(candidate: CandidateJson): Promise<void>;
  onAbandon(): void;
}

export class CandidatePicker {
  readonly element: HTMLElement;
  private selected: CandidateJson | null = null;
  private buttons = new Map<string, HTMLButtonElement>();
  private confirmButton: HTMLButtonElement;
  private done = false;

  constructor(
    private candidates: CandidateJson[],
    private hooks: PickerHooks,
  ) {
    this.element = document.createElement("div");
    this.element.className = "picker";

    const list = document.createElement("ol");
    for (const candidate of candidates) {
      const row = document.createElement("li");
      const pick = document.createElement("button");
      pick.className = "pick";
      pick.dataset.candidate = candidate.id;
      pick.textContent = `${candidate.program_text} (${Math.round(
        candidate.prob * 100,
      )}%)`;
      if (candidate.trace.warnings.length > 0) {
        pick.dataset.warnings = String(candidate.trace.warnings.length);
      }
      pick.addEventListener("click", () => this.select(candidate));
      this.buttons.set(candidate.id, pick);
      row.appendChild(pick);
      list.appendChild(row);
    }
    this.element.appendChild(list);

    this.confirmButton = document.createElement("button");
    this.confirmButton.className = "confirm";
    this.confirmButton.textContent = "run it";
    this.confirmButton.disabled = true;
    this.confirmButton.addEventListener("click", () => void this.confirm());
    this.element.appendChild(this.confirmButton);

    const dismiss = document.createElement("button");
    dismiss.className = "dismiss";
    dismiss.textContent = "never mind";
    dismiss.addEventListener("click", () => {
      if (!this.done) hooks.onAbandon();
      this.element.remove();
    });
    this.element.appendChild(dismiss);

    // a single reading still needs an explicit confirmation
    const only = candidates[0];
    if (candidates.length === 1 && only !== undefined) this.select(only);
  }

  private select(candidate: CandidateJson): void {
    if (this.done) return;
    this.selected = candidate;
    for (const [id, button] of this.buttons) {
      button.classList.toggle("selected", id === candidate.id);
    }
    this.confirmButton.disabled = false;
    this.hooks.onPreview(candidate);
  }

  private async confirm(): Promise<void> {
    if (this.done || this.selected === null) return;
    this.done = true;
    this.setDisabled(true);
    try {
      await this.hooks.onConfirm(this.selected);
    } catch {
      // the hook reports the failure; allow another attempt
      this.done = false;
      this.setDisabled(false);
    }
  }

  private setDisabled(disabled: boolean): void {
    for (const button of this.buttons.values()) button.disabled = disabled;
    this.confirmButton.disabled = disabled;
  }
}
