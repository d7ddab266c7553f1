"""Deterministic parser for the core language.

Used wherever program text must mean exactly one thing: loading saved
programs, the command line runner, and compiling rule bodies.  User-facing
utterances go through the ranking parser instead, which layers the learned
rules and the scoring model on top of the same chart.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Optional

from .chart import build_chart, parse_span
from .grammar import Category, core_rules
from .tokens import token_texts


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: list[str]):
        super().__init__(message)
        self.position = position  # token index of the furthest contiguous reach
        self.expected = expected


@lru_cache(maxsize=32)
def _rules_for(named_areas: tuple[str, ...]):
    return core_rules(named_areas)


def parse_core(text: str, named_areas: Iterable[str] = (),
               goal: Category = Category.STMT):
    """Parse ``text`` into a program, or raise ParseError."""
    return parse_core_derivation(text, named_areas, goal).value


def parse_core_derivation(text: str, named_areas: Iterable[str] = (),
                          goal: Category = Category.STMT):
    tokens = token_texts(text)
    if not tokens:
        raise ParseError("empty program", 0, [goal.value])
    rules = _rules_for(tuple(sorted(set(named_areas))))
    chart = build_chart(tokens, rules, beam_size=100,
                        tie_key=lambda d: d.canonical_key())
    roots = parse_span(chart, goal)
    if not roots:
        pos = min(chart.furthest_reach(), len(tokens) - 1)
        expected = chart.categories_at(pos)
        at = tokens[pos] if pos < len(tokens) else "<end>"
        raise ParseError(f"cannot parse at token {pos} ({at!r})", pos, expected)
    return min(roots, key=lambda d: d.canonical_key())
