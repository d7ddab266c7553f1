"""Bottom-up chart parser over the dynamic rule set.

Every span is filled in order of increasing length; rules match their rhs
against a span by anchoring terminals and enumerating slot sub-spans that
already hold derivations of the slot category.  Each (cell, category) keeps at
most ``beam_size`` derivations, ranked by model score with a deterministic
tie-break.  Unary rules (single-slot rhs) are iterated to a fixpoint within
each cell.

Rule grouping constraints (see lang.grammar) are applied while combining, so
unbraced sequences, loop bodies and flat binary operators parse canonically.
"""
from __future__ import annotations

import hashlib
from itertools import product
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .grammar import Category, GrammarRule, Slot, apply_rule

SEED_RULE_ID = "$seed"


class Derivation:
    """One parse tree: a rule applied to child derivations over a token span."""

    __slots__ = ("rule", "children", "start", "end", "value", "add_score",
                 "score", "depth", "tokens", "_sig", "_hash", "_ckey")

    def __init__(self, rule, children, start, end, value, add_score, score, depth):
        self.rule = rule
        self.children = children
        self.start = start
        self.end = end
        self.value = value
        self.add_score = add_score
        self.score = score
        self.depth = depth
        self.tokens: Optional[list[str]] = None  # set on returned roots
        self._sig = None
        self._hash = None
        self._ckey = None

    def signature(self) -> tuple:
        if self._sig is None:
            self._sig = (self.rule.id, self.start, self.end,
                         tuple(c.signature() for c in self.children))
        return self._sig

    def hash_hex(self) -> str:
        if self._hash is None:
            self._hash = hashlib.sha1(repr(self.signature()).encode()).hexdigest()
        return self._hash

    def canonical_key(self) -> tuple:
        """Leftmost-longest, then rule id, over a pre-order walk."""
        if self._ckey is None:
            acc: list = []
            stack = [self]
            while stack:
                d = stack.pop()
                acc.append((d.start, d.start - d.end, d.rule.id))
                stack.extend(reversed(d.children))
            self._ckey = tuple(acc)
        return self._ckey

    def walk(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.children))

    def __repr__(self) -> str:
        return f"<Derivation {self.rule.id} [{self.start},{self.end}) {self.value!r}>"


def seed_rule(cat: Category) -> GrammarRule:
    return GrammarRule(id=SEED_RULE_ID, lhs=cat, rhs=("$",), body=(),
                       author="core", origin="core", build=lambda v: None)


class Chart:
    def __init__(self, tokens: Sequence[str], n: int):
        self.tokens = list(tokens)
        self.n = n
        self.cells: dict[tuple[int, int], dict[Category, list[Derivation]]] = {}
        self.ends: dict[tuple[int, Category], list[int]] = {}

    def add(self, deriv: Derivation) -> None:
        cell = self.cells.setdefault((deriv.start, deriv.end), {})
        cell.setdefault(deriv.rule.lhs, []).append(deriv)

    def register_span(self, start: int, end: int, cat: Category) -> None:
        key = (start, cat)
        ends = self.ends.setdefault(key, [])
        if not ends or ends[-1] != end:
            ends.append(end)

    def derivations(self, start: int, end: int, cat: Category) -> list[Derivation]:
        return self.cells.get((start, end), {}).get(cat, [])

    def furthest_reach(self) -> int:
        """Longest contiguous prefix covered by recognized constituents."""
        pos = 0
        while True:
            nxt = -1
            for (i, _cat), ends in self.ends.items():
                if i == pos and ends:
                    nxt = max(nxt, ends[-1])
            if nxt <= pos:
                return pos
            pos = nxt
            if pos >= self.n:
                return self.n

    def categories_at(self, pos: int) -> list[str]:
        cats = {cat.value for (i, cat) in self.ends if i == pos}
        return sorted(cats)


def _match_rhs(rhs: tuple, i: int, j: int, chart: Chart) -> list[tuple]:
    """All ways to lay out rhs over tokens[i:j); yields slot (start, end) tuples."""
    out: list[tuple] = []
    tokens = chart.tokens
    m = len(rhs)

    def rec(k: int, pos: int, acc: list) -> None:
        if k == m:
            if pos == j:
                out.append(tuple(acc))
            return
        remaining = m - k - 1  # every later element needs >= 1 token
        e = rhs[k]
        if isinstance(e, str):
            if pos < j and tokens[pos] == e and pos + 1 + remaining <= j:
                rec(k + 1, pos + 1, acc)
            return
        ends = chart.ends.get((pos, e.cat), ())
        for end in ends:
            if end + remaining > j:
                break
            if k == m - 1 and end != j:
                continue
            acc.append((pos, end))
            rec(k + 1, end, acc)
            acc.pop()

    rec(0, i, [])
    return out


def build_chart(tokens: Sequence[str], rules: Iterable[GrammarRule], *,
                beam_size: int = 50,
                weights: Optional[Mapping[str, float]] = None,
                rule_features: Optional[Callable[[GrammarRule], Mapping[str, float]]] = None,
                seeds: Sequence[tuple[int, Category, object]] = (),
                tie_key: Optional[Callable[[Derivation], object]] = None) -> Chart:
    tokens = list(tokens)
    n = len(tokens)
    weights = dict(weights or {})
    w_depth = weights.get("tree-depth", 0.0)
    w_cov = weights.get("coverage", 0.0)
    tie = tie_key or (lambda d: d.hash_hex())
    feats = rule_features or (lambda rule: {})

    by_first_tok: dict[str, list[GrammarRule]] = {}
    slot_first: list[GrammarRule] = []
    unary: list[GrammarRule] = []
    for rule in rules:
        head = rule.rhs[0]
        if isinstance(head, str):
            by_first_tok.setdefault(head, []).append(rule)
        else:
            slot_first.append(rule)
            if len(rule.rhs) == 1:
                unary.append(rule)

    chart = Chart(tokens, n)

    def own_score(rule: GrammarRule) -> float:
        fs = feats(rule)
        return sum(weights.get(name, 0.0) * val for name, val in fs.items())

    def make(rule, children, start, end):
        values = [c.value for c in children]
        value = apply_rule(rule, values)
        add = own_score(rule) + sum(c.add_score for c in children)
        depth = 1 + max((c.depth for c in children), default=0)
        cov = (end - start) / n if n else 0.0
        score = add + w_depth * depth + w_cov * cov
        return Derivation(rule, tuple(children), start, end, value, add, score, depth)

    for pos, cat, value in seeds:
        d = Derivation(seed_rule(cat), (), pos, pos + 1, value, 0.0, 0.0, 1)
        chart.add(d)
        chart.register_span(pos, pos + 1, cat)

    for length in range(1, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            cell = chart.cells.setdefault((i, j), {})
            seen: set = set()
            for cat, ds in cell.items():  # pre-seeded entries
                for d in ds:
                    seen.add((d.rule.id, ()))

            def try_rule(rule: GrammarRule) -> int:
                added = 0
                if len(rule.rhs) > length:
                    return 0
                for assignment in _match_rhs(rule.rhs, i, j, chart):
                    lists = []
                    ok = True
                    constraint = rule.constraint or {}
                    for k, (s, e) in enumerate(assignment):
                        cand = chart.derivations(s, e, rule.slots[k].cat)
                        forbidden = constraint.get(k)
                        if forbidden:
                            cand = [d for d in cand if d.rule.id not in forbidden]
                        if not cand:
                            ok = False
                            break
                        lists.append(cand)
                    if not ok:
                        continue
                    for combo in product(*lists):
                        key = (rule.id, tuple(id(c) for c in combo))
                        if key in seen:
                            continue
                        seen.add(key)
                        d = make(rule, combo, i, j)
                        cell.setdefault(rule.lhs, []).append(d)
                        chart.register_span(i, j, rule.lhs)
                        added += 1
                return added

            candidates = list(by_first_tok.get(tokens[i], ())) + slot_first
            for rule in candidates:
                try_rule(rule)
            # unary rules can chain within the cell (e.g. C -> Prop, Act -> Stmt)
            for _ in range(6):
                grew = 0
                for rule in unary:
                    grew += try_rule(rule)
                if not grew:
                    break

            for cat, ds in cell.items():
                ds.sort(key=lambda d: (-d.score, tie(d)))
                del ds[beam_size:]
                chart.register_span(i, j, cat)

    return chart


def parse_span(chart: Chart, goal: Category) -> list[Derivation]:
    out = list(chart.derivations(0, chart.n, goal))
    for d in out:
        d.tokens = chart.tokens
    return out
