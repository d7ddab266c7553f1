import { beforeEach, describe, expect, it } from "vitest";

import { Animator, type Scheduler } from "../src/animate.js";
import { renderWorld } from "../src/render.js";
import type { TraceJson, WorldJson } from "../src/types.js";

const instant: Scheduler = { delay: () => Promise.resolve() };

function startWorld(): WorldJson {
  return {
    width: 5,
    height: 1,
    obstacles: [],
    items: [],
    robot: { x: 0, y: 0, holding: [] },
    named_areas: {},
  };
}

const fourSteps: TraceJson = {
  steps: [
    { op: "move", dir: "right" },
    { op: "move", dir: "right" },
    { op: "move", dir: "right" },
    { op: "move", dir: "right" },
  ],
  warnings: [],
};

let stage: HTMLElement;
let toasts: HTMLElement;

beforeEach(() => {
  stage = document.createElement("div");
  toasts = document.createElement("div");
});

describe("Animator", () => {
  it("plays one frame per step", async () => {
    const animator = new Animator(stage, toasts, instant);
    await animator.play(startWorld(), fourSteps);
    expect(animator.framesPlayed).toBe(4);
    expect(
      stage.querySelector('.cell[data-x="4"][data-y="0"] .robot'),
    ).not.toBeNull();
    expect(toasts.children).toHaveLength(0);
  });

  it("animates nothing for an all-or-nothing failure, but toasts the reason", async () => {
    const animator = new Animator(stage, toasts, instant);
    const refusal: TraceJson = {
      steps: [],
      warnings: [
        { path: "", reason: "not fully realizable: not enough free cells" },
      ],
    };
    await animator.play(startWorld(), refusal);
    expect(animator.framesPlayed).toBe(0);
    expect(stage.innerHTML).toBe(renderWorld(startWorld()).outerHTML);
    const toast = toasts.querySelector(".toast");
    expect(toast?.textContent).toBe(
      "not fully realizable: not enough free cells",
    );
  });

  it("restarts from the base world when replayed", async () => {
    const animator = new Animator(stage, toasts, instant);
    const first = await animator.play(startWorld(), fourSteps);
    expect(first.robot.x).toBe(4);
    const second = await animator.play(startWorld(), fourSteps);
    expect(second.robot.x).toBe(4);
    expect(animator.framesPlayed).toBe(8);
    // starting a replay snaps the stage back to the base world first
    await animator.play(startWorld(), { steps: [], warnings: [] });
    expect(stage.innerHTML).toBe(renderWorld(startWorld()).outerHTML);
  });

  it("waits on the scheduler between frames at the configured rate", async () => {
    const delays: number[] = [];
    const counting: Scheduler = {
      delay: (ms) => {
        delays.push(ms);
        return Promise.resolve();
      },
    };
    const animator = new Animator(stage, toasts, counting, 80);
    await animator.play(startWorld(), fourSteps);
    expect(delays).toEqual([80, 80, 80, 80]);
  });
});
