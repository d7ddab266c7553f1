"""Program interpreter.

Execution is lenient by default: an action that cannot run is skipped with a
warning naming its position in the program, and everything else proceeds.
``strict`` wraps an action or block to run all-or-nothing: the body is
simulated on a copy and committed only when it produced no warnings.

Unrealizability is data, not an exception; callers read Trace.warnings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import planner, world as wd
from .lang.ast import (Every, Foreach, If, ItemAction, Move, One, Repeat, Seq,
                       Strict, Visit, VisitAvoiding, While)
from .world import (DropStep, EvalError, GridWorld, IllegalStep, MoveStep,
                    PickStep, eval_area, eval_cond, held_items, items_at,
                    matches)

WHILE_CAP = 10_000  # the language can express non-termination; stay responsive


@dataclass(frozen=True)
class ExecWarning:
    path: str  # attribute path into the program AST, "" = root
    reason: str


@dataclass
class Trace:
    steps: list
    warnings: list[ExecWarning]
    final: GridWorld


@dataclass
class ExecOutcome:
    trace: Trace
    realizable: bool
    # act path -> one (world before, world after, emitted steps) per execution
    contexts: Optional[dict[str, list[tuple]]] = None


@dataclass
class _ActFailure(Exception):
    reason: str


class _Runner:
    def __init__(self, start: GridWorld, collect: bool = False):
        self.world = start
        self.steps: list = []
        self.warnings: list[ExecWarning] = []
        self.contexts: Optional[dict[str, list[tuple]]] = {} if collect else None

    def warn(self, path: str, reason: str) -> None:
        self.warnings.append(ExecWarning(path, reason))

    def run(self, node, path: str, env: dict) -> None:
        if isinstance(node, Seq):
            self.run(node.first, f"{path}/first", env)
            self.run(node.second, f"{path}/second", env)
        elif isinstance(node, Repeat):
            for _ in range(node.count):
                self.run(node.body, f"{path}/body", env)
        elif isinstance(node, Foreach):
            self.run_foreach(node, path, env)
        elif isinstance(node, If):
            try:
                hold = eval_cond(node.cond, self.world, env)
            except EvalError as e:
                self.warn(path, str(e))
                return
            if hold:
                self.run(node.body, f"{path}/body", env)
        elif isinstance(node, While):
            count = 0
            while True:
                if count >= WHILE_CAP:
                    self.warn(path, f"loop stopped after {WHILE_CAP} iterations")
                    break
                try:
                    hold = eval_cond(node.cond, self.world, env)
                except EvalError as e:
                    self.warn(path, str(e))
                    break
                if not hold:
                    break
                self.run(node.body, f"{path}/body", env)
                count += 1
        else:
            self.run_act(node, path, env)

    def run_foreach(self, node: Foreach, path: str, env: dict) -> None:
        try:
            points = eval_area(node.area, self.world, env)
        except EvalError as e:
            self.warn(path, str(e))
            return
        order, dropped = planner.visit_order(self.world.robot.position, points,
                                             self.world)
        for site in dropped:
            self.warn(path, f"site {site} is unreachable")
        for site in order:
            moves = planner.shortest_path(self.world.robot.position, {site},
                                          self.world)
            for d in moves:
                self.apply(MoveStep(d))
            inner = dict(env)
            inner["point"] = site
            self.run(node.body, f"{path}/body", inner)

    def run_act(self, node, path: str, env: dict) -> None:
        before = self.world
        try:
            steps, after = self.act_steps(node, path, env)
        except _ActFailure as e:
            self.warn(path, e.reason)
            return
        self.steps.extend(steps)
        self.world = after
        if self.contexts is not None:
            self.contexts.setdefault(path, []).append((before, after, tuple(steps)))

    def apply(self, step) -> None:
        self.world = wd.step(self.world, step)
        self.steps.append(step)

    def act_steps(self, node, path: str, env: dict) -> tuple[list, GridWorld]:
        w = self.world
        if isinstance(node, Move):
            try:
                return [MoveStep(node.direction)], wd.step(w, MoveStep(node.direction))
            except IllegalStep as e:
                raise _ActFailure(e.reason)
        if isinstance(node, (Visit, VisitAvoiding)):
            avoid: set = set()
            try:
                targets = eval_area(node.area, w, env)
                if isinstance(node, VisitAvoiding):
                    avoid = eval_area(node.avoid, w, env)
            except EvalError as e:
                raise _ActFailure(str(e))
            if not targets:
                raise _ActFailure("the target area is empty")
            moves = planner.shortest_path(w.robot.position, targets, w, avoid)
            if moves is None:
                raise _ActFailure("no reachable target cell")
            steps: list = []
            for d in moves:
                steps.append(MoveStep(d))
                w = wd.step(w, MoveStep(d))
            return steps, w
        if isinstance(node, ItemAction):
            return self.item_steps(node, w)
        if isinstance(node, Strict):
            sub = _Runner(w)
            sub.run(node.body, f"{path}/body", env)
            if sub.warnings:
                raise _ActFailure(f"not fully realizable: {sub.warnings[0].reason}")
            return sub.steps, sub.world
        raise _ActFailure(f"cannot execute {type(node).__name__}")

    def item_steps(self, node: ItemAction, w: GridWorld) -> tuple[list, GridWorld]:
        query = node.query
        if node.kind == "pick":
            scope = items_at(w, w.robot.position)
            make = PickStep
        else:
            scope = held_items(w)
            make = DropStep
        chosen = [i for i in scope if matches(query.item, i)]  # id-sorted scope
        if isinstance(query, One):
            if not chosen:
                where = "here" if node.kind == "pick" else "in hand"
                raise _ActFailure(f"no matching item {where}")
            chosen = chosen[:1]
        elif not isinstance(query, Every):
            raise _ActFailure(f"bad item query {type(query).__name__}")
        steps: list = []
        for item in chosen:
            s = make(item.id)
            steps.append(s)
            w = wd.step(w, s)
        return steps, w


def execute(program, w: GridWorld, collect_contexts: bool = False) -> ExecOutcome:
    runner = _Runner(w, collect=collect_contexts)
    runner.run(program, "", {})
    trace = Trace(steps=runner.steps, warnings=runner.warnings, final=runner.world)
    return ExecOutcome(trace=trace, realizable=not runner.warnings,
                       contexts=runner.contexts)


def realizable(program, w: GridWorld, env: Optional[dict] = None) -> bool:
    runner = _Runner(w)
    runner.run(program, "", dict(env or {}))
    return not runner.warnings


def trace_to_json(trace: Trace) -> dict:
    return {
        "steps": [wd.step_to_json(s) for s in trace.steps],
        "warnings": [{"path": w.path, "reason": w.reason} for w in trace.warnings],
    }
