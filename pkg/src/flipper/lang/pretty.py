"""Canonical program text.

Emits exactly one surface form per program: sequences chain to the right,
statement bodies and nested operators are braced only where the grammar's
grouping constraints require it, and filters print as ``is <prop>``.
``parse_core(pretty(p))`` recovers ``p`` for every well-formed program.
"""
from __future__ import annotations

from . import ast
from .ast import (AnyItem, AreaAnd, AreaMinus, AreaOr, Color, Containing,
                  Every, Filtered, FltrAnd, FltrNot, FltrOr, Foreach, Hole, If,
                  Is, ItemAction, ItemAt, LoopPoint, Move, NamedArea, One,
                  PointList, PointLit, Possible, Repeat, RobotAt, RobotHas,
                  Seq, Shape, Strict, Visit, VisitAvoiding, While, World)

_AREA_BIN = (AreaAnd, AreaOr, AreaMinus)
_FLTR_BIN = (FltrAnd, FltrOr)


def pretty(node) -> str:
    return detokenize(pretty_tokens(node))


def detokenize(tokens: list[str]) -> str:
    out: list[str] = []
    for tok in tokens:
        if out and tok not in (",", ";", "]") and out[-1] != "[":
            out.append(" ")
        out.append(tok)
    return "".join(out)


def pretty_tokens(node) -> list[str]:
    out: list[str] = []
    _emit(node, out)
    return out


def _braced(node, out: list[str]) -> None:
    out.append("{")
    _emit(node, out)
    out.append("}")


def _stmt_body(node, out: list[str]) -> None:
    if isinstance(node, Seq):
        _braced(node, out)
    else:
        _emit(node, out)


def _emit(node, out: list[str]) -> None:
    if isinstance(node, Seq):
        if isinstance(node.first, Seq):
            _braced(node.first, out)
        else:
            _emit(node.first, out)
        out.append(";")
        _emit(node.second, out)
    elif isinstance(node, Repeat):
        out += ["repeat", _num(node.count), "times"]
        _stmt_body(node.body, out)
    elif isinstance(node, Foreach):
        out += ["foreach", "point", "in"]
        _emit(node.area, out)
        _stmt_body(node.body, out)
    elif isinstance(node, If):
        out.append("if")
        _emit(node.cond, out)
        _stmt_body(node.body, out)
    elif isinstance(node, While):
        out.append("while")
        _emit(node.cond, out)
        _stmt_body(node.body, out)
    elif isinstance(node, Visit):
        out.append("visit")
        _emit(node.area, out)
    elif isinstance(node, VisitAvoiding):
        out.append("visit")
        _emit(node.area, out)
        out += ["while", "avoiding"]
        _emit(node.avoid, out)
    elif isinstance(node, Move):
        out += ["move", node.direction]
    elif isinstance(node, ItemAction):
        out.append(_num(node.kind) if isinstance(node.kind, Hole) else node.kind)
        _emit(node.query, out)
    elif isinstance(node, Strict):
        out.append("strict")
        if ast.is_action(node.body):
            _emit(node.body, out)
        else:
            _braced(node.body, out)
    elif isinstance(node, Every):
        out.append("every")
        _emit(node.item, out)
    elif isinstance(node, One):
        _emit(node.item, out)
    elif isinstance(node, AnyItem):
        out.append("item")
    elif isinstance(node, Filtered):
        out.append("item")
        _emit(node.filter, out)
    elif isinstance(node, Is):
        out.append("is")
        _emit(node.prop, out)
    elif isinstance(node, (FltrAnd, FltrOr)):
        _emit(node.left, out)
        out.append("and" if isinstance(node, FltrAnd) else "or")
        if isinstance(node.right, _FLTR_BIN):
            _braced(node.right, out)
        else:
            _emit(node.right, out)
    elif isinstance(node, FltrNot):
        out.append("not")
        if isinstance(node.inner, _FLTR_BIN):
            _braced(node.inner, out)
        else:
            _emit(node.inner, out)
    elif isinstance(node, (Color, Shape)):
        out.append(node.name)
    elif isinstance(node, World):
        out.append("world")
    elif isinstance(node, NamedArea):
        out.append(node.name)
    elif isinstance(node, PointLit):
        out += ["[", _num(node.x), ",", _num(node.y), "]"]
    elif isinstance(node, LoopPoint):
        out.append("point")
    elif isinstance(node, PointList):
        out.append("[")
        for k, p in enumerate(node.points):
            if k:
                out.append(",")
            _emit(p, out)
        out.append("]")
    elif isinstance(node, Containing):
        if isinstance(node.area, _AREA_BIN):
            _braced(node.area, out)
        else:
            _emit(node.area, out)
        out.append("containing")
        _emit(node.item, out)
    elif isinstance(node, (AreaAnd, AreaOr, AreaMinus)):
        _emit(node.left, out)
        out.append({AreaAnd: "and", AreaOr: "or", AreaMinus: "minus"}[type(node)])
        if isinstance(node.right, _AREA_BIN):
            _braced(node.right, out)
        else:
            _emit(node.right, out)
    elif isinstance(node, ItemAt):
        _emit(node.item, out)
        out.append("at")
        _emit(node.area, out)
    elif isinstance(node, RobotHas):
        out += ["robot", "has"]
        _emit(node.item, out)
    elif isinstance(node, RobotAt):
        out += ["robot", "at"]
        _emit(node.area, out)
    elif isinstance(node, Possible):
        out.append("possible")
        _stmt_body(node.stmt, out)
    elif isinstance(node, Hole):
        out.append(f"$slot{node.index}")
    else:
        raise TypeError(f"cannot print {type(node).__name__}")


def _num(value) -> str:
    if isinstance(value, Hole):
        return f"$slot{value.index}"
    return str(value)
