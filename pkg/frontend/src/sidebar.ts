/** Sidebar listing taught rules. Each entry shows the rule text, who taught
 * it, and a link to the world it was taught in; the delete affordance appears
 * only on the viewer's own rules and removes the entry once the server
 * confirms.
 */
import { displayRule, type RuleJson } from "./types.js";

export interface SidebarHooks {
  user: string;
  onDelete(ruleId: string): Promise<void>;
  contextHref(context: string): string;
}

export class RuleSidebar {
  readonly element: HTMLElement;
  private list: HTMLElement;

  constructor(private hooks: SidebarHooks) {
    this.element = document.createElement("aside");
    this.element.className = "rule-sidebar";
    const heading = document.createElement("h2");
    heading.textContent = "taught rules";
    this.element.appendChild(heading);
    this.list = document.createElement("ul");
    this.list.className = "rules";
    this.element.appendChild(this.list);
  }

  update(rules: RuleJson[]): void {
    const taught = rules.filter((rule) => rule.origin !== "core");
    if (taught.length === 0) {
      const notice = document.createElement("li");
      notice.className = "core-only";
      notice.textContent = "no taught rules yet; only the built-in language";
      this.list.replaceChildren(notice);
      return;
    }
    this.list.replaceChildren(...taught.map((rule) => this.entry(rule)));
  }

  private entry(rule: RuleJson): HTMLElement {
    const item = document.createElement("li");
    item.className = "rule";
    item.dataset.rule = rule.id;

    const text = document.createElement("span");
    text.className = "rule-text";
    text.textContent = displayRule(rule);
    item.appendChild(text);

    const author = document.createElement("span");
    author.className = "author";
    author.textContent = rule.author;
    item.appendChild(author);

    if (rule.context !== null) {
      const context = document.createElement("a");
      context.className = "context";
      context.href = this.hooks.contextHref(rule.context);
      context.textContent = "where";
      item.appendChild(context);
    }

    if (rule.author === this.hooks.user) {
      const remove = document.createElement("button");
      remove.className = "delete";
      remove.textContent = "forget";
      remove.addEventListener("click", () => {
        void this.hooks.onDelete(rule.id).then(() => item.remove());
      });
      item.appendChild(remove);
    }
    return item;
  }
}
