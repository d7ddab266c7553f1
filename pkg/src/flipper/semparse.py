"""Ranking parser and the log-linear choice model.

Parses utterances against the dynamic rule set (core plus induced), scores
every full-span derivation with weights over rule/author/shape features,
and updates the weights from user choices by one softmax-gradient step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .lang.chart import Derivation, build_chart, parse_span
from .lang.ast import Hole, substitute
from .lang.grammar import Category, GrammarRule, SlotRef
from .lang.tokens import token_texts

F_CORE = "core-rules"
F_INDUCED = "induced-rules"
F_AUTHOR_SELF = "author-self"
F_AUTHOR_OTHER = "author-other"
F_DEPTH = "tree-depth"
F_COVERAGE = "coverage"

DEFAULT_LEARNING_RATE = 0.1
DEFAULT_BEAM_SIZE = 50


class NoParse(Exception):
    def __init__(self, message: str, position: int, expected: list[str]):
        super().__init__(message)
        self.position = position
        self.expected = expected


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    weights: dict[str, float] = field(default_factory=dict)
    learning_rate: float = DEFAULT_LEARNING_RATE
    beam_size: int = DEFAULT_BEAM_SIZE

    def weight(self, name: str) -> float:
        return self.weights.get(name, 0.0)


def rule_features(rule: GrammarRule, user: str) -> dict[str, float]:
    feats = {f"rule:{rule.id}": 1.0}
    if rule.origin == "core":
        feats[F_CORE] = 1.0
    else:
        feats[F_INDUCED] = 1.0
        if rule.author == user:
            feats[F_AUTHOR_SELF] = 1.0
        else:
            feats[F_AUTHOR_OTHER] = 1.0
    return feats


def features(deriv: Derivation, user: str) -> dict[str, float]:
    """Recompute the full feature vector from the tree."""
    out: dict[str, float] = {}
    for node in deriv.walk():
        if node.rule.id == "$seed":
            continue
        for name, val in rule_features(node.rule, user).items():
            out[name] = out.get(name, 0.0) + val
    out[F_DEPTH] = float(deriv.depth)
    n = len(deriv.tokens) if deriv.tokens else (deriv.end - deriv.start)
    out[F_COVERAGE] = (deriv.end - deriv.start) / n if n else 0.0
    return out


def parse(text: str, user: str, rules: Sequence[GrammarRule],
          params: Optional[ModelParams] = None) -> list[Derivation]:
    """Full-span Stmt derivations, best first; raises NoParse."""
    params = params or ModelParams()
    tokens = token_texts(text)
    if not tokens:
        raise NoParse("empty utterance", 0, [Category.STMT.value])
    chart = build_chart(tokens, rules, beam_size=params.beam_size,
                        weights=params.weights,
                        rule_features=lambda r: rule_features(r, user),
                        tie_key=lambda d: d.hash_hex())
    roots = parse_span(chart, Category.STMT)
    if not roots:
        pos = min(chart.furthest_reach(), len(tokens) - 1)
        at = tokens[pos] if pos < len(tokens) else "<end>"
        raise NoParse(f"cannot parse at token {pos} ({at!r})", pos,
                      chart.categories_at(pos))
    roots.sort(key=lambda d: (-d.score, d.hash_hex()))
    return roots


def probabilities(candidates: Sequence[Derivation]) -> list[float]:
    if not candidates:
        return []
    top = max(d.score for d in candidates)
    exps = [math.exp(d.score - top) for d in candidates]
    total = sum(exps)
    return [e / total for e in exps]


def top_k(candidates: Sequence[Derivation], k: int = 3) -> list[Derivation]:
    return list(candidates[:k])


def update(params: ModelParams, candidates: Sequence[Derivation], chosen: int,
           user: str) -> ModelParams:
    """One gradient step toward the chosen candidate."""
    if not 0 <= chosen < len(candidates):
        raise IndexError(f"chosen index {chosen} out of range")
    probs = probabilities(candidates)
    vectors = [features(d, user) for d in candidates]
    grad: dict[str, float] = dict(vectors[chosen])
    for p, vec in zip(probs, vectors):
        for name, val in vec.items():
            grad[name] = grad.get(name, 0.0) - p * val
    weights = dict(params.weights)
    for name, g in grad.items():
        if g:
            weights[name] = weights.get(name, 0.0) + params.learning_rate * g
    return replace(params, weights=weights)


def program_probability(program, text: str, user: str,
                        rules: Sequence[GrammarRule],
                        params: Optional[ModelParams] = None) -> float:
    """Softmax mass of the derivations of ``text`` that mean ``program``."""
    try:
        candidates = parse(text, user, rules, params)
    except NoParse:
        return 0.0
    probs = probabilities(candidates)
    return sum(p for p, d in zip(probs, candidates) if d.value == program)


def compile_rule(rule: GrammarRule, rules: Sequence[GrammarRule]) -> GrammarRule:
    """Attach a semantic template: the rule body parsed with slot holes."""
    slots = rule.slots
    tokens: list[str] = []
    seeds: list[tuple[int, Category, object]] = []
    for element in rule.body:
        if isinstance(element, SlotRef):
            seeds.append((len(tokens), slots[element.index].cat,
                          Hole(element.index)))
            tokens.append(f"$slot{element.index}")
        else:
            tokens.append(element)
    goals: list[Category] = [rule.lhs]
    for fallback in (Category.STMT, Category.ACT):
        if fallback not in goals:
            goals.append(fallback)
    chart = build_chart(tokens, rules, beam_size=100, seeds=seeds,
                        tie_key=lambda d: d.canonical_key())
    for goal in goals:
        roots = parse_span(chart, goal)
        if roots:
            best = min(roots, key=lambda d: d.canonical_key())
            return replace(rule, template=best.value, build=None)
    raise TemplateError(f"rule body does not parse: {rule.body!r}")
