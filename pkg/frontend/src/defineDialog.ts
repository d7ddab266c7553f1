/** Definition dialog shown when an utterance does not parse. On success it
 * surfaces how the definition was generalized and which rules were induced;
 * on a parse error it highlights the offending token.
 */
import { ApiError } from "./api.js";
import { displayRule, type DefineResponse } from "./types.js";

export interface DefineHooks {
  onDefine(definition: string): Promise<DefineResponse>;
  onDone(result: DefineResponse): void;
  onCancel(): void;
}

export class DefineDialog {
  readonly element: HTMLElement;
  private input: HTMLTextAreaElement;
  private feedback: HTMLElement;

  constructor(
    readonly utterance: string,
    private hooks: DefineHooks,
  ) {
    this.element = document.createElement("div");
    this.element.className = "define-dialog";

    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.textContent = `I don't understand "${utterance}" yet. Define it with words I know:`;
    this.element.appendChild(prompt);

    this.input = document.createElement("textarea");
    this.input.className = "definition";
    this.element.appendChild(this.input);

    this.feedback = document.createElement("div");
    this.feedback.className = "feedback";
    this.element.appendChild(this.feedback);

    const submit = document.createElement("button");
    submit.className = "submit";
    submit.textContent = "teach";
    submit.addEventListener("click", () => void this.submit());
    this.element.appendChild(submit);

    const cancel = document.createElement("button");
    cancel.className = "cancel";
    cancel.textContent = "cancel";
    cancel.addEventListener("click", () => {
      this.element.remove();
      hooks.onCancel();
    });
    this.element.appendChild(cancel);
  }

  private async submit(): Promise<void> {
    const definition = this.input.value.trim();
    if (definition === "") return;
    try {
      const result = await this.hooks.onDefine(definition);
      this.showSuccess(result);
      this.hooks.onDone(result);
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(definition, err);
        return;
      }
      throw err;
    }
  }

  private showSuccess(result: DefineResponse): void {
    const banner = document.createElement("p");
    banner.className = "generalized";
    banner.textContent = `your definition was generalized to "${result.generalized_from}"`;
    const rules = document.createElement("ul");
    rules.className = "new-rules";
    for (const rule of result.induced_rules) {
      const entry = document.createElement("li");
      entry.textContent = displayRule(rule);
      rules.appendChild(entry);
    }
    this.feedback.replaceChildren(banner, rules);
  }

  private showError(definition: string, err: ApiError): void {
    const note = document.createElement("p");
    note.className = "error";
    note.textContent = String(err.body.error ?? err.message);
    this.feedback.replaceChildren(note);

    if (typeof err.body.position === "number") {
      const tokens = definition.split(/\s+/);
      const marked = document.createElement("p");
      marked.className = "marked-definition";
      tokens.forEach((token, index) => {
        if (index > 0) marked.appendChild(document.createTextNode(" "));
        if (index === err.body.position) {
          const bad = document.createElement("mark");
          bad.textContent = token;
          marked.appendChild(bad);
        } else {
          marked.appendChild(document.createTextNode(token));
        }
      });
      this.feedback.appendChild(marked);
    }
    if (Array.isArray(err.body.warnings)) {
      const list = document.createElement("ul");
      list.className = "exec-warnings";
      for (const warning of err.body.warnings as { reason: string }[]) {
        const entry = document.createElement("li");
        entry.textContent = warning.reason;
        list.appendChild(entry);
      }
      this.feedback.appendChild(list);
    }
  }
}
