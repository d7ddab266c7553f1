/** Top-level wiring. All state changes flow through the server: the rendered
 * grid always shows the last server-confirmed world, plus (while previewing a
 * candidate) the uncommitted animation overlay. A single serial event queue
 * orders socket frames and user actions, and at most one state-changing
 * request is in flight at a time.
 */
import { Client } from "./api.js";
import { Animator, type Scheduler } from "./animate.js";
import { CandidatePicker } from "./picker.js";
import { DefineDialog } from "./defineDialog.js";
import { RuleSidebar } from "./sidebar.js";
import type { CandidateJson, StepFrame, WorldJson } from "./types.js";

/** Runs tasks strictly one after another, in arrival order. */
export class EventQueue {
  private tail: Promise<void> = Promise.resolve();

  run<T>(task: () => T | Promise<T>): Promise<T> {
    const result = this.tail.then(task);
    this.tail = result.then(
      () => undefined,
      () => undefined,
    );
    return result;
  }
}

export function applyDiff(
  world: WorldJson,
  diff: StepFrame["world_diff"],
): WorldJson {
  const next: WorldJson = JSON.parse(JSON.stringify(world));
  if (diff.robot !== undefined) {
    next.robot.x = diff.robot[0];
    next.robot.y = diff.robot[1];
  }
  for (const [id, where] of Object.entries(diff.items ?? {})) {
    const item = next.items.find((candidate) => candidate.id === id);
    if (item === undefined) continue;
    if ("held" in where) {
      delete item.x;
      delete item.y;
      if (!next.robot.holding.includes(id)) {
        next.robot.holding = [...next.robot.holding, id].sort();
      }
    } else {
      item.x = where.x;
      item.y = where.y;
      next.robot.holding = next.robot.holding.filter((held) => held !== id);
    }
  }
  return next;
}

export interface AppOptions {
  user: string;
  world: string;
  scheduler?: Scheduler;
  stepMs?: number;
}

export class App {
  readonly queue = new EventQueue();
  session = "";
  serverWorld!: WorldJson;

  private stage: HTMLElement;
  private toasts: HTMLElement;
  private interaction: HTMLElement;
  private input: HTMLInputElement;
  private animator: Animator;
  private sidebar: RuleSidebar;
  private picker: CandidatePicker | null = null;
  private dialog: DefineDialog | null = null;
  private previewing = false;
  private mutationInFlight = false;
  private closeSocket: (() => void) | null = null;

  constructor(
    readonly root: HTMLElement,
    private client: Client,
    private options: AppOptions,
  ) {
    root.classList.add("app");

    const main = document.createElement("div");
    main.className = "main";
    this.stage = document.createElement("div");
    this.stage.className = "stage";
    this.toasts = document.createElement("div");
    this.toasts.className = "toasts";
    this.interaction = document.createElement("div");
    this.interaction.className = "interaction";

    const form = document.createElement("form");
    form.className = "say";
    this.input = document.createElement("input");
    this.input.className = "utterance";
    this.input.placeholder = "tell the robot something";
    const go = document.createElement("button");
    go.type = "submit";
    go.textContent = "go";
    form.append(this.input, go);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (text !== "") void this.say(text);
    });

    main.append(this.stage, this.toasts, form, this.interaction);
    root.appendChild(main);

    this.animator = new Animator(
      this.stage,
      this.toasts,
      options.scheduler,
      options.stepMs,
    );
    this.sidebar = new RuleSidebar({
      user: options.user,
      onDelete: (ruleId) =>
        this.mutate(() => this.client.deleteRule(ruleId, options.user)).then(
          () => undefined,
        ),
      contextHref: (context) => `#world/${context}`,
    });
    root.appendChild(this.sidebar.element);
  }

  async start(): Promise<void> {
    const created = await this.mutate(() =>
      this.client.createSession(this.options.world, this.options.user),
    );
    this.session = created.session_id;
    this.serverWorld = created.world;
    this.animator.show(this.serverWorld);
    this.closeSocket = this.client.subscribe(this.session, (frame) => {
      void this.queue.run(() => this.onFrame(frame));
    });
    await this.refreshRules();
  }

  stop(): void {
    this.closeSocket?.();
    this.closeSocket = null;
  }

  /** Send an utterance; show the candidate picker, or the definition dialog
   * when the robot cannot parse it. */
  async say(text: string): Promise<void> {
    this.clearInteraction();
    this.animator.clearToasts();
    const response = await this.mutate(() =>
      this.client.utterance(this.session, text),
    );
    if ("status" in response) {
      this.openDefineDialog(text);
      return;
    }
    this.openPicker(response.candidates);
  }

  private openDefineDialog(utterance: string): void {
    this.dialog = new DefineDialog(utterance, {
      onDefine: (definition) =>
        this.mutate(() =>
          this.client.define(this.session, utterance, definition),
        ),
      onDone: () => {
        void this.refreshRules();
      },
      onCancel: () => {
        this.dialog = null;
      },
    });
    this.interaction.appendChild(this.dialog.element);
  }

  private openPicker(candidates: CandidateJson[]): void {
    this.picker = new CandidatePicker(candidates, {
      onPreview: (candidate) => {
        void this.queue.run(async () => {
          this.previewing = true;
          this.animator.clearToasts();
          await this.animator.play(this.serverWorld, candidate.trace);
        });
      },
      onConfirm: async (candidate) => {
        let committed;
        try {
          committed = await this.mutate(() =>
            this.client.choose(this.session, candidate.id),
          );
        } catch (err) {
          this.animator.toast(err instanceof Error ? err.message : String(err));
          throw err;
        }
        await this.queue.run(() => {
          this.serverWorld = committed.world;
          this.previewing = false;
          this.animator.show(this.serverWorld);
        });
        this.clearInteraction();
      },
      onAbandon: () => {
        void this.queue.run(() => {
          this.previewing = false;
          this.animator.show(this.serverWorld);
        });
        this.picker = null;
      },
    });
    this.interaction.appendChild(this.picker.element);
  }

  private onFrame(frame: StepFrame): void {
    if (frame.type !== "step") return;
    this.serverWorld = applyDiff(this.serverWorld, frame.world_diff);
    if (!this.previewing) this.animator.show(this.serverWorld);
  }

  private clearInteraction(): void {
    this.interaction.replaceChildren();
    this.picker = null;
    this.dialog = null;
    if (this.previewing) {
      this.previewing = false;
      this.animator.show(this.serverWorld);
    }
  }

  async refreshRules(): Promise<void> {
    const rules = await this.queue.run(() => this.client.rules());
    this.sidebar.update(rules);
  }

  /** State-changing requests are serialized: the queue runs one task at a
   * time, and the flag below turns any violation into a loud failure. */
  private mutate<T>(request: () => Promise<T>): Promise<T> {
    return this.queue.run(async () => {
      if (this.mutationInFlight) {
        throw new Error("a state-changing request is already in flight");
      }
      this.mutationInFlight = true;
      try {
        return await request();
      } finally {
        this.mutationInFlight = false;
      }
    });
  }
}
