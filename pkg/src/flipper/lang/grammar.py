"""Grammar categories and rules.

A rule rewrites a category to a sequence of terminals and category slots and
carries a semantic template over the core language.  Core rules have native
constructors and an identity body; induced rules are built by the induction
module and carry a compiled template (an AST with Hole leaves).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Optional

from . import ast
from .ast import (AnyItem, AreaAnd, AreaMinus, AreaOr, Color, Containing,
                  Every, Filtered, FltrAnd, FltrNot, FltrOr, Foreach, Hole, If,
                  Is, ItemAction, ItemAt, LoopPoint, Move, NamedArea, One,
                  PointList, PointLit, Possible, Repeat, RobotAt, RobotHas,
                  Seq, Shape, Strict, Visit, VisitAvoiding, While, World)


class Category(str, Enum):
    STMT = "Stmt"
    ACT = "Act"
    ITEMACT = "ItemAct"
    AREA = "Area"
    PNT = "Pnt"
    NUM = "Num"
    QITM = "QItm"
    ITM = "Itm"
    FLTR = "Fltr"
    PROP = "Prop"
    C = "C"
    S = "S"
    CND = "Cnd"

    def __str__(self) -> str:  # used in displays and serialized rules
        return self.value


PRIMITIVE_CATEGORIES = frozenset({Category.NUM, Category.C, Category.S})

CORE_AUTHOR = "core"

MAX_POINT_LIST = 8  # literal point lists support arities 1..8


@dataclass(frozen=True)
class Slot:
    cat: Category


@dataclass(frozen=True)
class SlotRef:
    index: int


@dataclass(frozen=True)
class GrammarRule:
    id: str
    lhs: Category
    rhs: tuple  # str terminals and Slot elements, non-empty
    body: tuple  # str terminals and SlotRef elements (indices into rhs slots)
    author: str
    origin: str  # core | induced-simple | induced-best | induced-align | induced-generalized
    context: Optional[str] = None  # world snapshot id at definition time
    build: Optional[Callable] = field(default=None, compare=False, repr=False)
    template: Optional[object] = field(default=None, compare=False, repr=False)
    # slot index -> top rule ids the child at that slot may not use (grouping)
    constraint: Optional[dict] = field(default=None, compare=False, repr=False)

    @property
    def slots(self) -> tuple[Slot, ...]:
        return tuple(e for e in self.rhs if isinstance(e, Slot))

    def key(self) -> tuple:
        """Content identity used for de-duplication."""
        return (self.lhs.value, _rhs_sig(self.rhs), _body_sig(self.body))


def _rhs_sig(rhs: tuple) -> tuple:
    return tuple(e if isinstance(e, str) else ("$", e.cat.value) for e in rhs)


def _body_sig(body: tuple) -> tuple:
    return tuple(e if isinstance(e, str) else ("$", e.index) for e in body)


def rule_content_id(lhs: Category, rhs: tuple, body: tuple) -> str:
    blob = json.dumps([lhs.value, _rhs_sig(rhs), _body_sig(body)])
    return "r" + hashlib.sha1(blob.encode()).hexdigest()[:12]


def apply_rule(rule: GrammarRule, values: list) -> object:
    if rule.build is not None:
        return rule.build(values)
    if rule.template is None:
        raise ValueError(f"rule {rule.id} has no semantics attached")
    return ast.substitute(rule.template, values)


def display_rule(rule: GrammarRule) -> str:
    slot_cats = [s.cat.value for s in rule.slots]
    rhs = " ".join(e if isinstance(e, str) else e.cat.value for e in rule.rhs)
    body = " ".join(e if isinstance(e, str) else slot_cats[e.index] for e in rule.body)
    return f"{rule.lhs.value} -> {rhs} ::= {body}"


def rule_to_json(rule: GrammarRule) -> dict:
    return {
        "id": rule.id,
        "lhs": rule.lhs.value,
        "rhs": [e if isinstance(e, str) else {"cat": e.cat.value} for e in rule.rhs],
        "body": [e if isinstance(e, str) else {"slot": e.index} for e in rule.body],
        "author": rule.author,
        "origin": rule.origin,
        "context": rule.context,
    }


def rule_from_json(data: dict) -> GrammarRule:
    """Rebuild a serialized rule; the semantic template is compiled separately."""
    rhs = tuple(e if isinstance(e, str) else Slot(Category(e["cat"])) for e in data["rhs"])
    body = tuple(e if isinstance(e, str) else SlotRef(e["slot"]) for e in data["body"])
    return GrammarRule(
        id=data["id"],
        lhs=Category(data["lhs"]),
        rhs=rhs,
        body=body,
        author=data["author"],
        origin=data["origin"],
        context=data.get("context"),
    )


# core rule set ---------------------------------------------------------------

def _identity_body(rhs: tuple) -> tuple:
    body, k = [], 0
    for e in rhs:
        if isinstance(e, str):
            body.append(e)
        else:
            body.append(SlotRef(k))
            k += 1
    return tuple(body)


def _core(rule_id: str, lhs: Category, rhs: tuple, build: Callable,
          constraint: Callable | None = None) -> GrammarRule:
    return GrammarRule(id=rule_id, lhs=lhs, rhs=rhs, body=_identity_body(rhs),
                       author=CORE_AUTHOR, origin="core", build=build,
                       constraint=constraint)


# Grouping constraints keep parses canonical without extra categories:
# a Seq's left child and every loop/if/while/possible body must be braced to
# nest a Seq; binary Fltr/Area operators are flat and left-associative
# (the right operand must be braced to nest); `containing` binds tighter than
# the binary area operators; `not` binds tighter than `and`/`or`.

_FLTR_BIN = ("fltr-and", "fltr-or")
_AREA_BIN = ("area-and", "area-or", "area-minus")


def _child_not(idx: int, forbidden: tuple[str, ...]) -> dict[int, frozenset[str]]:
    return {idx: frozenset(forbidden)}


def core_rules(named_areas: Iterable[str] = ()) -> tuple[GrammarRule, ...]:
    S, C = Slot, Category
    rules = [
        _core("stmt-act", C.STMT, (S(C.ACT),), lambda v: v[0]),
        _core("stmt-seq", C.STMT, (S(C.STMT), ";", S(C.STMT)),
              lambda v: Seq(v[0], v[1]), _child_not(0, ("stmt-seq",))),
        _core("stmt-repeat", C.STMT, ("repeat", S(C.NUM), "times", S(C.STMT)),
              lambda v: Repeat(v[0], v[1]), _child_not(1, ("stmt-seq",))),
        _core("stmt-foreach", C.STMT,
              ("foreach", "point", "in", S(C.AREA), S(C.STMT)),
              lambda v: Foreach(v[0], v[1]), _child_not(1, ("stmt-seq",))),
        _core("stmt-if", C.STMT, ("if", S(C.CND), S(C.STMT)),
              lambda v: If(v[0], v[1]), _child_not(1, ("stmt-seq",))),
        _core("stmt-while", C.STMT, ("while", S(C.CND), S(C.STMT)),
              lambda v: While(v[0], v[1]), _child_not(1, ("stmt-seq",))),
        _core("stmt-braces", C.STMT, ("{", S(C.STMT), "}"), lambda v: v[0]),

        _core("act-visit", C.ACT, ("visit", S(C.AREA)), lambda v: Visit(v[0])),
        _core("act-visit-avoid", C.ACT,
              ("visit", S(C.AREA), "while", "avoiding", S(C.AREA)),
              lambda v: VisitAvoiding(v[0], v[1])),
        _core("act-item", C.ACT, (S(C.ITEMACT), S(C.QITM)),
              lambda v: ItemAction(v[0], v[1])),
        _core("act-strict", C.ACT, ("strict", S(C.ACT)), lambda v: Strict(v[0])),
        _core("act-strict-block", C.ACT, ("strict", "{", S(C.STMT), "}"),
              lambda v: Strict(v[0])),

        _core("itemact-pick", C.ITEMACT, ("pick",), lambda v: "pick"),
        _core("itemact-drop", C.ITEMACT, ("drop",), lambda v: "drop"),

        _core("area-world", C.AREA, ("world",), lambda v: World()),
        _core("area-pnt", C.AREA, (S(C.PNT),), lambda v: v[0]),
        _core("area-containing", C.AREA, (S(C.AREA), "containing", S(C.ITM)),
              lambda v: Containing(v[0], v[1]), _child_not(0, _AREA_BIN)),
        _core("area-and", C.AREA, (S(C.AREA), "and", S(C.AREA)),
              lambda v: AreaAnd(v[0], v[1]), _child_not(1, _AREA_BIN)),
        _core("area-or", C.AREA, (S(C.AREA), "or", S(C.AREA)),
              lambda v: AreaOr(v[0], v[1]), _child_not(1, _AREA_BIN)),
        _core("area-minus", C.AREA, (S(C.AREA), "minus", S(C.AREA)),
              lambda v: AreaMinus(v[0], v[1]), _child_not(1, _AREA_BIN)),
        _core("area-braces", C.AREA, ("{", S(C.AREA), "}"), lambda v: v[0]),

        _core("pnt-lit", C.PNT, ("[", S(C.NUM), ",", S(C.NUM), "]"),
              lambda v: PointLit(v[0], v[1])),
        _core("pnt-point", C.PNT, ("point",), lambda v: LoopPoint()),

        _core("qitm-every", C.QITM, ("every", S(C.ITM)), lambda v: Every(v[0])),
        _core("qitm-one", C.QITM, (S(C.ITM),), lambda v: One(v[0])),

        _core("itm-any", C.ITM, ("item",), lambda v: AnyItem()),
        _core("itm-fltr", C.ITM, ("item", S(C.FLTR)), lambda v: Filtered(v[0])),

        _core("fltr-is", C.FLTR, ("is", S(C.PROP)), lambda v: Is(v[0])),
        _core("fltr-is-color", C.FLTR, ("is", "color", S(C.C)),
              lambda v: Is(Color(v[0]))),
        _core("fltr-is-shape", C.FLTR, ("is", "shape", S(C.S)),
              lambda v: Is(Shape(v[0]))),
        _core("fltr-has-color", C.FLTR, ("has", "color", S(C.C)),
              lambda v: Is(Color(v[0]))),
        _core("fltr-has-shape", C.FLTR, ("has", "shape", S(C.S)),
              lambda v: Is(Shape(v[0]))),
        _core("fltr-and", C.FLTR, (S(C.FLTR), "and", S(C.FLTR)),
              lambda v: FltrAnd(v[0], v[1]), _child_not(1, _FLTR_BIN)),
        _core("fltr-or", C.FLTR, (S(C.FLTR), "or", S(C.FLTR)),
              lambda v: FltrOr(v[0], v[1]), _child_not(1, _FLTR_BIN)),
        _core("fltr-not", C.FLTR, ("not", S(C.FLTR)),
              lambda v: FltrNot(v[0]), _child_not(0, _FLTR_BIN)),
        _core("fltr-braces", C.FLTR, ("{", S(C.FLTR), "}"), lambda v: v[0]),

        _core("prop-c", C.PROP, (S(C.C),), lambda v: Color(v[0])),
        _core("prop-s", C.PROP, (S(C.S),), lambda v: Shape(v[0])),

        _core("cnd-item-at", C.CND, (S(C.ITM), "at", S(C.AREA)),
              lambda v: ItemAt(v[0], v[1])),
        _core("cnd-robot-has", C.CND, ("robot", "has", S(C.ITM)),
              lambda v: RobotHas(v[0])),
        _core("cnd-robot-at", C.CND, ("robot", "at", S(C.AREA)),
              lambda v: RobotAt(v[0])),
        _core("cnd-possible", C.CND, ("possible", S(C.STMT)),
              lambda v: Possible(v[0]), _child_not(0, ("stmt-seq",))),
    ]

    for d in ast.DIRECTIONS:
        rules.append(_core(f"act-move-{d}", C.ACT, ("move", d),
                           lambda v, d=d: Move(d)))
    for name in ast.COLORS:
        rules.append(_core(f"c-{name}", C.C, (name,), lambda v, n=name: n))
    for name in ast.SHAPES:
        rules.append(_core(f"s-{name}", C.S, (name,), lambda v, n=name: n))
    for arity in range(1, MAX_POINT_LIST + 1):
        rhs: list = ["["]
        for k in range(arity):
            if k:
                rhs.append(",")
            rhs.append(S(C.PNT))
        rhs.append("]")
        rules.append(_core(f"area-list-{arity}", C.AREA, tuple(rhs),
                           lambda v: PointList(tuple(v))))
    for n in range(100):
        rules.append(_core(f"num-{n}", C.NUM, (str(n),), lambda v, n=n: n))
    for name in named_areas:
        rules.append(_core(f"area-named-{name}", C.AREA, (name,),
                           lambda v, n=name: NamedArea(n)))
    return tuple(rules)


def with_context(rule: GrammarRule, context: str | None) -> GrammarRule:
    return replace(rule, context=context)
