"""AST nodes for the core command language.

All nodes are frozen dataclasses and compare structurally.  A Program is just
the root statement node.  Rule templates may contain Hole leaves (slot
placeholders) anywhere a value could sit; substitute() fills them.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

COLORS = ("red", "green", "blue", "yellow", "black", "white")
SHAPES = ("triangle", "square", "circle", "star")
DIRECTIONS = ("up", "down", "left", "right")


class Node:
    __slots__ = ()


# statements ---------------------------------------------------------------

@dataclass(frozen=True)
class Seq(Node):
    first: Node
    second: Node


@dataclass(frozen=True)
class Repeat(Node):
    count: object  # int, or a Hole inside templates
    body: Node


@dataclass(frozen=True)
class Foreach(Node):
    area: Node
    body: Node


@dataclass(frozen=True)
class If(Node):
    cond: Node
    body: Node


@dataclass(frozen=True)
class While(Node):
    cond: Node
    body: Node


# actions ------------------------------------------------------------------

@dataclass(frozen=True)
class Visit(Node):
    area: Node


@dataclass(frozen=True)
class VisitAvoiding(Node):
    area: Node
    avoid: Node


@dataclass(frozen=True)
class Move(Node):
    direction: str


@dataclass(frozen=True)
class ItemAction(Node):
    kind: object  # "pick" | "drop", or a Hole inside templates
    query: Node


@dataclass(frozen=True)
class Strict(Node):
    body: Node  # a single action or a braced statement block


# areas ----------------------------------------------------------------------

@dataclass(frozen=True)
class World(Node):
    pass


@dataclass(frozen=True)
class PointLit(Node):
    x: object
    y: object


@dataclass(frozen=True)
class LoopPoint(Node):
    """The current point of the innermost foreach."""


@dataclass(frozen=True)
class PointList(Node):
    points: tuple


@dataclass(frozen=True)
class Containing(Node):
    area: Node
    item: Node


@dataclass(frozen=True)
class AreaAnd(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class AreaOr(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class AreaMinus(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class NamedArea(Node):
    name: str


# items and filters ---------------------------------------------------------

@dataclass(frozen=True)
class AnyItem(Node):
    pass


@dataclass(frozen=True)
class Filtered(Node):
    filter: Node


@dataclass(frozen=True)
class One(Node):
    item: Node


@dataclass(frozen=True)
class Every(Node):
    item: Node


@dataclass(frozen=True)
class Is(Node):
    prop: Node


@dataclass(frozen=True)
class FltrAnd(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class FltrOr(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class FltrNot(Node):
    inner: Node


@dataclass(frozen=True)
class Color(Node):
    name: object


@dataclass(frozen=True)
class Shape(Node):
    name: object


# conditions ------------------------------------------------------------------

@dataclass(frozen=True)
class ItemAt(Node):
    item: Node
    area: Node


@dataclass(frozen=True)
class RobotHas(Node):
    item: Node


@dataclass(frozen=True)
class RobotAt(Node):
    area: Node


@dataclass(frozen=True)
class Possible(Node):
    stmt: Node


# templates -------------------------------------------------------------------

@dataclass(frozen=True)
class Hole(Node):
    index: int


Program = Node

_STMT_TYPES = (Seq, Repeat, Foreach, If, While,
               Visit, VisitAvoiding, Move, ItemAction, Strict)
_ACT_TYPES = (Visit, VisitAvoiding, Move, ItemAction, Strict)


def is_statement(node: object) -> bool:
    return isinstance(node, _STMT_TYPES)


def is_action(node: object) -> bool:
    return isinstance(node, _ACT_TYPES)


def substitute(node: object, values: list) -> object:
    """Replace every Hole(i) in a template by values[i], rebuilding the tree."""
    if isinstance(node, Hole):
        return values[node.index]
    if isinstance(node, tuple):
        return tuple(substitute(v, values) for v in node)
    if isinstance(node, Node):
        kw = {f.name: substitute(getattr(node, f.name), values) for f in fields(node)}
        return type(node)(**kw)
    return node


def has_holes(node: object) -> bool:
    if isinstance(node, Hole):
        return True
    if isinstance(node, tuple):
        return any(has_holes(v) for v in node)
    if isinstance(node, Node):
        return any(has_holes(getattr(node, f.name)) for f in fields(node))
    return False
