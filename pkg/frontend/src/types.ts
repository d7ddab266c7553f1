/** JSON shapes exchanged with the server. */

export type Point = [number, number];

export interface ItemJson {
  id: string;
  color: string;
  shape: string;
  x?: number;
  y?: number;
}

export interface RobotJson {
  x: number;
  y: number;
  holding: string[];
}

export interface WorldJson {
  width: number;
  height: number;
  obstacles: Point[];
  items: ItemJson[];
  robot: RobotJson;
  named_areas: Record<string, Point[]>;
}

export interface StepJson {
  op: "move" | "pick" | "drop";
  dir?: "up" | "down" | "left" | "right";
  item?: string;
}

export interface WarningJson {
  path: string;
  reason: string;
}

export interface TraceJson {
  steps: StepJson[];
  warnings: WarningJson[];
}

export interface CandidateJson {
  id: string;
  program_text: string;
  score: number;
  prob: number;
  trace: TraceJson;
}

export type UtteranceResponse =
  | { status: "unparsable" }
  | { candidates: CandidateJson[] };

export interface ChooseResponse {
  world: WorldJson;
  trace: TraceJson;
}

type RhsElement = string | { cat: string };
type BodyElement = string | { slot: number };

export interface RuleJson {
  id: string;
  lhs: string;
  rhs: RhsElement[];
  body: BodyElement[];
  author: string;
  origin: string;
  context: string | null;
}

export interface DefineResponse {
  induced_rules: RuleJson[];
  generalized_from: string;
}

export interface StepFrame {
  type: "step";
  step: StepJson;
  world_diff: {
    robot?: Point;
    items?: Record<string, { x: number; y: number } | { held: true }>;
  };
}

/** "Act -> pick Num items ::= repeat Num times pick item"; slot references
 * in the body count category slots only, skipping literal words. */
export function displayRule(rule: RuleJson): string {
  const slotCats = rule.rhs.flatMap((e) =>
    typeof e === "string" ? [] : [e.cat],
  );
  const rhs = rule.rhs
    .map((e) => (typeof e === "string" ? e : e.cat))
    .join(" ");
  const body = rule.body
    .map((e) => (typeof e === "string" ? e : slotCats[e.slot] ?? "?"))
    .join(" ");
  return `${rule.lhs} -> ${rhs} ::= ${body}`;
}
