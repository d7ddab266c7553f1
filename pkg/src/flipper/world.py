"""Grid world state and expression evaluation.

A world is an immutable value: a bounded grid with obstacle cells, placed
items, and one robot that may carry items.  Primitive transitions go through
``step`` and return a new world.  Area/filter/condition ASTs evaluate here;
``possible`` conditions delegate to the executor on a copy.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional

from .lang import ast
from .lang.ast import (AnyItem, AreaAnd, AreaMinus, AreaOr, Color, Containing,
                       Filtered, FltrAnd, FltrNot, FltrOr, Is, ItemAt,
                       LoopPoint, NamedArea, PointList, PointLit, Possible,
                       RobotAt, RobotHas, Shape, World)

Point = tuple[int, int]

# origin top-left, x rightward, y downward
DIRECTION_DELTAS: dict[str, Point] = {
    "up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0),
}


class EvalError(ValueError):
    """An expression cannot be evaluated in the current context."""


class UnknownNamedArea(EvalError):
    pass


class IllegalStep(ValueError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Item:
    id: str
    color: str
    shape: str
    position: Optional[Point]  # None iff carried


@dataclass(frozen=True)
class Robot:
    position: Point
    holding: frozenset[str]


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    obstacles: frozenset[Point]
    items: dict[str, Item]
    robot: Robot
    named_areas: dict[str, frozenset[Point]]

    __hash__ = None  # identity is fingerprint(), not Python hash


# primitive steps ------------------------------------------------------------

@dataclass(frozen=True)
class MoveStep:
    direction: str


@dataclass(frozen=True)
class PickStep:
    item: str


@dataclass(frozen=True)
class DropStep:
    item: str


Step = object  # MoveStep | PickStep | DropStep


def validate(w: GridWorld) -> None:
    if w.width <= 0 or w.height <= 0:
        raise ValueError("grid dimensions must be positive")
    for p in w.obstacles:
        if not (isinstance(p[0], int) and isinstance(p[1], int) and in_bounds(w, p)):
            raise ValueError(f"obstacle {p!r} is not an in-bounds cell")
    if not in_bounds(w, w.robot.position) or w.robot.position in w.obstacles:
        raise ValueError("robot must stand on a free in-bounds cell")
    for item_id in w.robot.holding:
        if item_id not in w.items:
            raise ValueError(f"held item {item_id!r} does not exist")
    for item_id, item in w.items.items():
        if item.id != item_id:
            raise ValueError(f"item key {item_id!r} does not match id {item.id!r}")
        carried = item_id in w.robot.holding
        if carried != (item.position is None):
            raise ValueError(f"item {item_id!r} must be placed xor carried")
        if item.position is not None:
            if not in_bounds(w, item.position) or item.position in w.obstacles:
                raise ValueError(f"item {item_id!r} placed on an illegal cell")
    for name, points in w.named_areas.items():
        for p in points:
            if not in_bounds(w, p):
                raise ValueError(f"named area {name!r} leaves the grid")


def in_bounds(w: GridWorld, p: Point) -> bool:
    return 0 <= p[0] < w.width and 0 <= p[1] < w.height


def passable(w: GridWorld, p: Point) -> bool:
    return in_bounds(w, p) and p not in w.obstacles


def items_at(w: GridWorld, p: Point) -> list[Item]:
    found = [i for i in w.items.values() if i.position == p]
    found.sort(key=lambda i: i.id)
    return found


def held_items(w: GridWorld) -> list[Item]:
    found = [w.items[i] for i in w.robot.holding]
    found.sort(key=lambda i: i.id)
    return found


# expression evaluation ------------------------------------------------------

def eval_area(area, w: GridWorld, env: Optional[Mapping] = None) -> set[Point]:
    if isinstance(area, World):
        return {(x, y) for x in range(w.width) for y in range(w.height)
                if (x, y) not in w.obstacles}
    if isinstance(area, PointLit):
        return {(area.x, area.y)}
    if isinstance(area, LoopPoint):
        if not env or "point" not in env:
            raise EvalError("'point' is only defined inside foreach")
        return {env["point"]}
    if isinstance(area, PointList):
        out: set[Point] = set()
        for p in area.points:
            out |= eval_area(p, w, env)
        return out
    if isinstance(area, NamedArea):
        if area.name not in w.named_areas:
            raise UnknownNamedArea(f"unknown area {area.name!r}")
        return set(w.named_areas[area.name])
    if isinstance(area, Containing):
        points = eval_area(area.area, w, env)
        return {p for p in points
                if any(matches(area.item, i) for i in items_at(w, p))}
    if isinstance(area, AreaAnd):
        return eval_area(area.left, w, env) & eval_area(area.right, w, env)
    if isinstance(area, AreaOr):
        return eval_area(area.left, w, env) | eval_area(area.right, w, env)
    if isinstance(area, AreaMinus):
        return eval_area(area.left, w, env) - eval_area(area.right, w, env)
    raise EvalError(f"not an area: {type(area).__name__}")


def matches(query, item: Item) -> bool:
    """Does the item satisfy an Itm or Fltr expression?"""
    if isinstance(query, AnyItem):
        return True
    if isinstance(query, Filtered):
        return matches(query.filter, item)
    if isinstance(query, Is):
        prop = query.prop
        if isinstance(prop, Color):
            return item.color == prop.name
        if isinstance(prop, Shape):
            return item.shape == prop.name
        raise EvalError(f"not a property: {type(prop).__name__}")
    if isinstance(query, FltrAnd):
        return matches(query.left, item) and matches(query.right, item)
    if isinstance(query, FltrOr):
        return matches(query.left, item) or matches(query.right, item)
    if isinstance(query, FltrNot):
        return not matches(query.inner, item)
    raise EvalError(f"not an item query: {type(query).__name__}")


def eval_items(query, scope: Iterable[Item]) -> set[Item]:
    return {i for i in scope if matches(query, i)}


def eval_cond(cond, w: GridWorld, env: Optional[Mapping] = None) -> bool:
    if isinstance(cond, ItemAt):
        points = eval_area(cond.area, w, env)
        return any(i.position in points and matches(cond.item, i)
                   for i in w.items.values() if i.position is not None)
    if isinstance(cond, RobotHas):
        return any(matches(cond.item, i) for i in held_items(w))
    if isinstance(cond, RobotAt):
        return w.robot.position in eval_area(cond.area, w, env)
    if isinstance(cond, Possible):
        from . import executor  # deferred: executor imports this module
        return executor.realizable(cond.stmt, w, env)
    raise EvalError(f"not a condition: {type(cond).__name__}")


# transitions ----------------------------------------------------------------

def step(w: GridWorld, s: Step) -> GridWorld:
    if isinstance(s, MoveStep):
        if s.direction not in DIRECTION_DELTAS:
            raise IllegalStep(f"unknown direction {s.direction!r}")
        dx, dy = DIRECTION_DELTAS[s.direction]
        dest = (w.robot.position[0] + dx, w.robot.position[1] + dy)
        if not passable(w, dest):
            raise IllegalStep(f"cannot move {s.direction}: cell {dest} is blocked")
        return replace(w, robot=replace(w.robot, position=dest))
    if isinstance(s, PickStep):
        item = w.items.get(s.item)
        if item is None or item.position != w.robot.position:
            raise IllegalStep(f"no item {s.item!r} at the robot's cell")
        items = dict(w.items)
        items[s.item] = replace(item, position=None)
        robot = replace(w.robot, holding=w.robot.holding | {s.item})
        return replace(w, items=items, robot=robot)
    if isinstance(s, DropStep):
        if s.item not in w.robot.holding:
            raise IllegalStep(f"not holding item {s.item!r}")
        items = dict(w.items)
        items[s.item] = replace(items[s.item], position=w.robot.position)
        robot = replace(w.robot, holding=w.robot.holding - {s.item})
        return replace(w, items=items, robot=robot)
    raise IllegalStep(f"unknown step {s!r}")


# serialization --------------------------------------------------------------

def world_to_json(w: GridWorld) -> dict:
    items = []
    for item in sorted(w.items.values(), key=lambda i: i.id):
        entry: dict = {"id": item.id, "color": item.color, "shape": item.shape}
        if item.position is not None:
            entry["x"], entry["y"] = item.position
        items.append(entry)
    return {
        "width": w.width,
        "height": w.height,
        "obstacles": sorted([x, y] for x, y in w.obstacles),
        "items": items,
        "robot": {"x": w.robot.position[0], "y": w.robot.position[1],
                  "holding": sorted(w.robot.holding)},
        "named_areas": {name: sorted([x, y] for x, y in pts)
                        for name, pts in sorted(w.named_areas.items())},
    }


def world_from_json(data: dict) -> GridWorld:
    items: dict[str, Item] = {}
    for entry in data.get("items", ()):
        pos = None
        if entry.get("x") is not None and entry.get("y") is not None:
            pos = (entry["x"], entry["y"])
        item = Item(id=str(entry["id"]), color=entry["color"],
                    shape=entry["shape"], position=pos)
        if item.color not in ast.COLORS:
            raise ValueError(f"unknown color {item.color!r}")
        if item.shape not in ast.SHAPES:
            raise ValueError(f"unknown shape {item.shape!r}")
        if item.id in items:
            raise ValueError(f"duplicate item id {item.id!r}")
        items[item.id] = item
    robot = Robot(position=(data["robot"]["x"], data["robot"]["y"]),
                  holding=frozenset(str(i) for i in data["robot"].get("holding", ())))
    w = GridWorld(
        width=data["width"],
        height=data["height"],
        obstacles=frozenset((x, y) for x, y in data.get("obstacles", ())),
        items=items,
        robot=robot,
        named_areas={name: frozenset((x, y) for x, y in pts)
                     for name, pts in data.get("named_areas", {}).items()},
    )
    validate(w)
    return w


def fingerprint(w: GridWorld) -> str:
    blob = json.dumps(world_to_json(w), sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode()).hexdigest()


def step_to_json(s: Step) -> dict:
    if isinstance(s, MoveStep):
        return {"op": "move", "dir": s.direction}
    if isinstance(s, PickStep):
        return {"op": "pick", "item": s.item}
    if isinstance(s, DropStep):
        return {"op": "drop", "item": s.item}
    raise ValueError(f"unknown step {s!r}")


def step_from_json(data: dict) -> Step:
    op = data["op"]
    if op == "move":
        return MoveStep(data["dir"])
    if op == "pick":
        return PickStep(data["item"])
    if op == "drop":
        return DropStep(data["item"])
    raise ValueError(f"unknown step op {op!r}")
