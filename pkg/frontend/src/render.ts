/** Top-down grid rendering: one glyph per item, a distinct robot marker,
 * shaded obstacles, tinted named areas. Output is deterministic so
 * snapshots can be compared as plain HTML strings.
 */
import type { StepJson, WorldJson } from "./types.js";

const GLYPHS: Record<string, string> = {
  triangle: "▲",
  square: "■",
  circle: "●",
  star: "★",
};

export function renderWorld(world: WorldJson): HTMLElement {
  const grid = document.createElement("div");
  grid.className = "world";
  grid.style.setProperty("--cols", String(world.width));

  const obstacles = new Set(world.obstacles.map(([x, y]) => `${x},${y}`));
  const rooms = new Map<string, string>();
  for (const [name, cells] of Object.entries(world.named_areas)) {
    for (const [x, y] of cells) rooms.set(`${x},${y}`, name);
  }
  const itemsAt = new Map<string, typeof world.items>();
  for (const item of world.items) {
    if (item.x === undefined || item.y === undefined) continue; // held
    const key = `${item.x},${item.y}`;
    itemsAt.set(key, [...(itemsAt.get(key) ?? []), item]);
  }

  for (let y = 0; y < world.height; y++) {
    for (let x = 0; x < world.width; x++) {
      const key = `${x},${y}`;
      const cell = document.createElement("div");
      cell.className = "cell";
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      if (obstacles.has(key)) cell.classList.add("obstacle");
      const room = rooms.get(key);
      if (room !== undefined) {
        cell.classList.add("room");
        cell.dataset.room = room;
      }
      for (const item of [...(itemsAt.get(key) ?? [])].sort((a, b) =>
        a.id < b.id ? -1 : 1,
      )) {
        const glyph = document.createElement("span");
        glyph.className = `item ${item.color} ${item.shape}`;
        glyph.dataset.item = item.id;
        glyph.textContent = GLYPHS[item.shape] ?? "?";
        cell.appendChild(glyph);
      }
      if (world.robot.x === x && world.robot.y === y) {
        const robot = document.createElement("span");
        robot.className = "robot";
        robot.textContent = "◈";
        if (world.robot.holding.length > 0) {
          robot.dataset.holding = String(world.robot.holding.length);
        }
        cell.appendChild(robot);
      }
      grid.appendChild(cell);
    }
  }
  return grid;
}

const DELTAS: Record<string, [number, number]> = {
  up: [0, -1],
  down: [0, 1],
  left: [-1, 0],
  right: [1, 0],
};

/** Pure client-side step application, used to overlay preview animations
 * on top of the last server-confirmed world. */
export function applyStep(world: WorldJson, step: StepJson): WorldJson {
  const next: WorldJson = JSON.parse(JSON.stringify(world));
  if (step.op === "move" && step.dir !== undefined) {
    const delta = DELTAS[step.dir];
    if (delta !== undefined) {
      next.robot.x += delta[0];
      next.robot.y += delta[1];
    }
  } else if (step.op === "pick" && step.item !== undefined) {
    for (const item of next.items) {
      if (item.id === step.item) {
        delete item.x;
        delete item.y;
      }
    }
    next.robot.holding = [...next.robot.holding, step.item].sort();
  } else if (step.op === "drop" && step.item !== undefined) {
    for (const item of next.items) {
      if (item.id === step.item) {
        item.x = next.robot.x;
        item.y = next.robot.y;
      }
    }
    next.robot.holding = next.robot.holding.filter((id) => id !== step.item);
  }
  return next;
}
