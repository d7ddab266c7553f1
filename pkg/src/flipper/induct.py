"""Rule induction from a defined utterance.

Given an utterance x the grammar cannot parse and a definition y it can, new
rules come from three procedures: packing only primitive-category spans
(simple), packing any shared spans and keeping the model's favorite maximal
packing (best), and near-identical token alignment (align).  Every produced
rule is compiled to a semantic template and checked to rebuild y's exact
program before it is offered.
"""
from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from typing import Optional, Sequence

from . import semparse
from .lang.chart import SEED_RULE_ID, Derivation
from .lang.ast import substitute
from .lang.grammar import (Category, GrammarRule, PRIMITIVE_CATEGORIES, Slot,
                           SlotRef, display_rule, rule_content_id)
from .lang.tokens import token_texts

MAX_PACKINGS = 200
_MAX_ENUM_NODES = 200_000


class NoMatches(Exception):
    pass


class NotAlignable(Exception):
    pass


class DefinitionNotParsable(Exception):
    def __init__(self, message: str, position: int, expected: list[str]):
        super().__init__(message)
        self.position = position
        self.expected = expected


@dataclass(frozen=True)
class Match:
    start: int  # token span in x
    end: int
    node: Derivation  # sub-derivation of y with the same token yield

    @property
    def category(self) -> Category:
        return self.node.rule.lhs


@dataclass
class BuiltRule:
    rule: GrammarRule
    check_values: list  # programs to substitute into the compiled template
    check_target: object  # expected result of the substitution


def find_matches(x_tokens: Sequence[str], y_deriv: Derivation) -> list[Match]:
    y_tokens = y_deriv.tokens
    out: list[Match] = []
    for node in y_deriv.walk():
        if node.rule.id == SEED_RULE_ID:
            continue
        yield_tokens = y_tokens[node.start:node.end]
        width = len(yield_tokens)
        for i in range(len(x_tokens) - width + 1):
            if list(x_tokens[i:i + width]) == yield_tokens:
                out.append(Match(i, i + width, node))
    out.sort(key=lambda m: (m.start, m.end, m.node.start, m.node.end,
                            -m.node.depth, m.node.rule.id))
    return out


def _x_overlap(a: Match, b: Match) -> bool:
    return a.start < b.end and b.start < a.end


def _y_overlap(a: Match, b: Match) -> bool:
    return a.node.start < b.node.end and b.node.start < a.node.end


def _compatible(a: Match, b: Match) -> bool:
    return not _x_overlap(a, b) and not _y_overlap(a, b)


# rule construction -----------------------------------------------------------

def _shape(node: Derivation) -> tuple:
    # pre-order rule ids pin the whole subtree, terminals included
    return tuple(d.rule.id for d in node.walk())


def _build_rule(x_tokens: Sequence[str], y_deriv: Derivation,
                packing: list[Match], origin: str,
                user: str) -> Optional[BuiltRule]:
    chosen = sorted(packing, key=lambda m: m.start)
    rhs: list = []
    pos = 0
    for m in chosen:
        rhs.extend(x_tokens[pos:m.start])
        rhs.append(Slot(m.category))
        pos = m.end
    rhs.extend(x_tokens[pos:])

    # bind every other structurally identical constituent to the same slot
    bound: list[tuple[int, int, int]] = [
        (m.node.start, m.node.end, k) for k, m in enumerate(chosen)]
    for k, m in enumerate(chosen):
        shape = _shape(m.node)
        for node in y_deriv.walk():
            if node.rule.id == SEED_RULE_ID or node.rule.lhs != m.category:
                continue
            if _shape(node) != shape:
                continue
            span = (node.start, node.end)
            if any(s < span[1] and span[0] < e for s, e, _ in bound):
                continue
            bound.append((span[0], span[1], k))
    bound.sort()

    body: list = []
    pos = 0
    for s, e, k in bound:
        body.extend(y_deriv.tokens[pos:s])
        body.append(SlotRef(k))
        pos = e
    body.extend(y_deriv.tokens[pos:])

    lhs = Category.STMT if y_deriv.rule.id == "stmt-seq" else Category.ACT
    rule = GrammarRule(id=rule_content_id(lhs, tuple(rhs), tuple(body)),
                       lhs=lhs, rhs=tuple(rhs), body=tuple(body),
                       author=user, origin=origin)
    if _degenerate(rule):
        return None
    return BuiltRule(rule, [m.node.value for m in chosen], y_deriv.value)


def _degenerate(rule: GrammarRule) -> bool:
    if len(rule.rhs) == 1 and isinstance(rule.rhs[0], Slot):
        return True  # would match any constituent of that category
    rhs_canon: list = []
    slot_no = 0
    for element in rule.rhs:
        if isinstance(element, Slot):
            rhs_canon.append(("$", slot_no))
            slot_no += 1
        else:
            rhs_canon.append(element)
    body_canon = [("$", e.index) if isinstance(e, SlotRef) else e
                  for e in rule.body]
    return rhs_canon == body_canon  # identity rewrite adds nothing


def _compile_checked(built: BuiltRule,
                     rules: Sequence[GrammarRule]) -> Optional[GrammarRule]:
    try:
        compiled = semparse.compile_rule(built.rule, rules)
    except semparse.TemplateError:
        return None
    if substitute(compiled.template, built.check_values) != built.check_target:
        return None
    return compiled


# the three induction procedures ----------------------------------------------

def _simple_built(x_tokens: Sequence[str],
                  y_deriv: Derivation, user: str) -> Optional[BuiltRule]:
    chosen: list[Match] = []
    for m in find_matches(x_tokens, y_deriv):
        if m.category not in PRIMITIVE_CATEGORIES:
            continue
        if all(_compatible(m, c) for c in chosen):
            chosen.append(m)
    if not chosen:
        return None
    return _build_rule(x_tokens, y_deriv, chosen, "induced-simple", user)


def simple_packing(x_tokens: Sequence[str], y_deriv: Derivation,
                   user: str) -> Optional[GrammarRule]:
    built = _simple_built(x_tokens, y_deriv, user)
    return built.rule if built else None


def _maximal_packings(matches: list[Match]) -> list[list[Match]]:
    results: list[list[Match]] = []
    visited = 0

    def maximal(chosen: list[Match]) -> bool:
        return all(any(not _compatible(m, c) for c in chosen) for m in matches
                   if m not in chosen)

    def rec(idx: int, chosen: list[Match]) -> None:
        nonlocal visited
        visited += 1
        if len(results) >= MAX_PACKINGS or visited > _MAX_ENUM_NODES:
            return
        if idx == len(matches):
            if chosen and maximal(chosen):
                results.append(list(chosen))
            return
        m = matches[idx]
        if all(_compatible(m, c) for c in chosen):
            chosen.append(m)
            rec(idx + 1, chosen)
            chosen.pop()
        rec(idx + 1, chosen)

    rec(0, [])
    return results


def best_packing(x_tokens: Sequence[str], y_deriv: Derivation, user: str,
                 rules: Sequence[GrammarRule],
                 params: semparse.ModelParams) -> Optional[GrammarRule]:
    matches = find_matches(x_tokens, y_deriv)
    if not matches:
        raise NoMatches("x and y share no parsable span")
    y_program = y_deriv.value
    best: Optional[tuple] = None
    for packing in _maximal_packings(matches):
        built = _build_rule(x_tokens, y_deriv, packing, "induced-best", user)
        if built is None:
            continue
        compiled = _compile_checked(built, rules)
        if compiled is None:
            continue
        score = _rederivation_score(x_tokens, y_program, compiled, rules,
                                    params, user)
        if score is None:
            continue
        depth_sum = sum(m.node.depth for m in packing)
        key = (-score, depth_sum, display_rule(compiled))
        if best is None or key < best[0]:
            best = (key, compiled)
    return best[1] if best else None


def _rederivation_score(x_tokens: Sequence[str], y_program,
                        rule: GrammarRule, rules: Sequence[GrammarRule],
                        params: semparse.ModelParams,
                        user: str) -> Optional[float]:
    text = " ".join(x_tokens)
    try:
        candidates = semparse.parse(text, user, list(rules) + [rule], params)
    except semparse.NoParse:
        return None
    scores = [d.score for d in candidates if d.value == y_program]
    return max(scores) if scores else None


def _align_built(x_tokens: Sequence[str], y_deriv: Derivation,
                 user: str) -> list[BuiltRule]:
    y_tokens = y_deriv.tokens
    ops = SequenceMatcher(None, list(x_tokens), list(y_tokens),
                          autojunk=False).get_opcodes()
    if any(tag not in ("equal", "replace") for tag, *_ in ops):
        raise NotAlignable("insertions or deletions present")
    blocks = [(i1, i2, j1, j2) for tag, i1, i2, j1, j2 in ops if tag == "replace"]
    if not blocks:
        return []
    if len(blocks) > 2:
        raise NotAlignable("more than two substitution spans")

    def map_y_to_x(j: int) -> int:
        for tag, i1, i2, j1, j2 in ops:
            if j1 <= j <= j2:
                if tag == "equal":
                    return i1 + (j - j1)
                if j == j1:
                    return i1
                if j == j2:
                    return i2
        raise NotAlignable(f"position {j} not mappable")

    out: list[BuiltRule] = []
    for (i1, i2, j1, j2) in blocks:
        host = _deepest_covering(y_deriv, j1, j2)
        if host is None:
            raise NotAlignable("substitution spans no single constituent")
        for (_, _, oj1, oj2) in blocks:
            if (oj1, oj2) != (j1, j2) and host.start <= oj1 and oj2 <= host.end:
                raise NotAlignable("one constituent spans two substitutions")
        survivors: list[Derivation] = []
        for child in host.children:
            if child.end <= j1 or child.start >= j2:
                survivors.append(child)
            elif j1 <= child.start and child.end <= j2:
                continue  # fully replaced
            else:
                raise NotAlignable("substitution cuts a constituent")
        survivors.sort(key=lambda c: c.start)
        rhs = _splice(x_tokens, map_y_to_x(host.start), map_y_to_x(host.end),
                      [(map_y_to_x(c.start), map_y_to_x(c.end),
                        Slot(c.rule.lhs)) for c in survivors])
        body = _splice(y_tokens, host.start, host.end,
                       [(c.start, c.end, SlotRef(k))
                        for k, c in enumerate(survivors)])
        rule = GrammarRule(
            id=rule_content_id(host.rule.lhs, rhs, body),
            lhs=host.rule.lhs, rhs=rhs, body=body,
            author=user, origin="induced-align")
        if not _degenerate(rule):
            out.append(BuiltRule(rule, [c.value for c in survivors],
                                 host.value))
    return out


def align(x_tokens: Sequence[str], y_deriv: Derivation,
          user: str) -> list[GrammarRule]:
    return [b.rule for b in _align_built(x_tokens, y_deriv, user)]


def _deepest_covering(root: Derivation, start: int,
                      end: int) -> Optional[Derivation]:
    best: Optional[Derivation] = None
    for node in root.walk():
        if node.rule.id == SEED_RULE_ID:
            continue
        if node.start <= start and end <= node.end:
            if (best is None or (node.end - node.start, -node.depth) <
                    (best.end - best.start, -best.depth)):
                best = node
    return best


def _splice(tokens: Sequence[str], start: int, end: int,
            replacements: list[tuple]) -> tuple:
    """tokens[start:end] with [s, e) sub-ranges replaced by given elements."""
    out: list = []
    pos = start
    for s, e, element in sorted(replacements, key=lambda r: (r[0], r[1])):
        out.extend(tokens[pos:s])
        out.append(element)
        pos = e
    out.extend(tokens[pos:end])
    return tuple(out)


# entry point ------------------------------------------------------------------

def induce(x_text: str, y_text: str, user: str,
           rules: Sequence[GrammarRule],
           params: Optional[semparse.ModelParams] = None
           ) -> tuple[object, list[GrammarRule]]:
    """(program of y, newly induced rules, compiled and verified)."""
    params = params or semparse.ModelParams()
    x_tokens = token_texts(x_text)
    try:
        y_candidates = semparse.parse(y_text, user, rules, params)
    except semparse.NoParse as e:
        raise DefinitionNotParsable(str(e), e.position, e.expected)
    y_deriv = y_candidates[0]

    produced: list[GrammarRule] = []
    built = _simple_built(x_tokens, y_deriv, user)
    if built is not None:
        compiled = _compile_checked(built, rules)
        if compiled is not None:
            produced.append(compiled)
    try:
        best = best_packing(x_tokens, y_deriv, user, rules, params)
        if best is not None:
            produced.append(best)  # already compiled and checked
    except NoMatches:
        pass
    try:
        for built in _align_built(x_tokens, y_deriv, user):
            compiled = _compile_checked(built, rules)
            if compiled is not None:
                produced.append(compiled)
    except NotAlignable:
        pass

    existing = {r.id for r in rules}
    out: list[GrammarRule] = []
    for rule in produced:
        if rule.id in existing or any(rule.id == r.id for r in out):
            continue
        out.append(rule)
    return y_deriv.value, out
