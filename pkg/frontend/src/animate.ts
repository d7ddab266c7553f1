/** Plays a trace step by step into a container, surfacing execution
 * warnings as toasts that quote the server's reason verbatim.
 */
import { applyStep, renderWorld } from "./render.js";
import type { TraceJson, WorldJson } from "./types.js";

export interface Scheduler {
  delay(ms: number): Promise<void>;
}

export const realScheduler: Scheduler = {
  delay: (ms) => new Promise((resolve) => setTimeout(resolve, ms)),
};

export class Animator {
  framesPlayed = 0;

  constructor(
    private stage: HTMLElement,
    private toasts: HTMLElement,
    private scheduler: Scheduler = realScheduler,
    public stepMs = 150,
  ) {}

  show(world: WorldJson): void {
    this.stage.replaceChildren(renderWorld(world));
  }

  /** Animates `trace` starting from `base`; returns the world as the
   * animation left it. The caller owns committing or abandoning it. */
  async play(base: WorldJson, trace: TraceJson): Promise<WorldJson> {
    let world = base;
    this.show(world);
    for (const step of trace.steps) {
      await this.scheduler.delay(this.stepMs);
      world = applyStep(world, step);
      this.show(world);
      this.framesPlayed += 1;
    }
    for (const warning of trace.warnings) {
      this.toast(warning.reason);
    }
    return world;
  }

  toast(reason: string): void {
    const note = document.createElement("div");
    note.className = "toast";
    note.textContent = reason;
    this.toasts.appendChild(note);
  }

  clearToasts(): void {
    this.toasts.replaceChildren();
  }
}
