"""Definition generalization.

Before inducing rules from (utterance, definition), the definition is rewritten
into alternatives that leave the exact step trace on the current world
unchanged, and the highest-scoring alternative is used instead.  Three rewrite
principles apply: identical consecutive statements become a loop, movement runs
become a visit to the end point (by coordinates or by an item predicate), and
consecutive picks or drops of the same kind become a single quantified action.

Scores are pairs (model probability, text similarity) compared lexicographically.
The similarity term compares the candidate's text against the utterance being
defined; with no embedding table loaded it falls back to token overlap.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

from . import semparse
from .executor import ExecWarning, Trace, execute
from .lang.ast import (COLORS, SHAPES, AnyItem, Color, Containing, Every,
                       Filtered, FltrAnd, Foreach, If, Is, ItemAction, Move,
                       PointLit, Repeat, Seq, Shape, Strict, Visit, While,
                       World)
from .lang.grammar import GrammarRule
from .lang.pretty import pretty
from .lang.tokens import token_texts
from .world import GridWorld, held_items, items_at, matches

CANDIDATE_CAP = 500
SCORE_EPSILON = 1e-9

log = logging.getLogger(__name__)


class UnrealizableDefinition(Exception):
    def __init__(self, warnings: Sequence[ExecWarning]):
        super().__init__("definition is not fully realizable on this world")
        self.warnings = list(warnings)


@dataclass(frozen=True)
class RewriteCandidate:
    program: object
    provenance: tuple[str, ...]  # rewrite principles applied, in order
    trace: Trace


@dataclass(frozen=True)
class GeneralizeResult:
    program: object
    text: str  # what the chosen definition reads as
    changed: bool  # False when the user's own definition won
    candidates: tuple[RewriteCandidate, ...]


# text similarity ---------------------------------------------------------------

class EmbeddingTable:
    """Word vectors plus the stop-word set excluded from averaging."""

    __slots__ = ("vectors", "stop_words", "dim")

    def __init__(self, vectors: dict[str, tuple[float, ...]],
                 stop_words: frozenset[str]):
        dims = {len(v) for v in vectors.values()}
        if len(dims) > 1:
            raise ValueError(f"mixed vector dimensions: {sorted(dims)}")
        self.vectors = vectors
        self.stop_words = stop_words
        self.dim = dims.pop() if dims else 0

    @classmethod
    def load(cls, path: str,
             stop_words: Optional[frozenset[str]] = None) -> "EmbeddingTable":
        vectors: dict[str, tuple[float, ...]] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                vectors[parts[0]] = tuple(float(v) for v in parts[1:])
        if stop_words is None:
            stop_words = default_stop_words()
        return cls(vectors, stop_words)


@lru_cache(maxsize=1)
def default_stop_words() -> frozenset[str]:
    text = resources.files("flipper").joinpath("data/stopwords.txt").read_text()
    return frozenset(w for w in text.split() if w)


def bundled_embeddings() -> EmbeddingTable:
    path = resources.files("flipper").joinpath("data/embeddings-100d.txt")
    with resources.as_file(path) as real:
        return EmbeddingTable.load(str(real))


@lru_cache(maxsize=1)
def _default_table() -> Optional[EmbeddingTable]:
    try:
        return bundled_embeddings()
    except (OSError, ValueError):
        return None


_warned_fallback = False


def sim(a: str, b: str, table: Optional[EmbeddingTable] = None) -> float:
    """Cosine of the two texts' average word vectors, in [-1, 1].

    Stop-words and out-of-vocabulary words are ignored; if either side has
    no usable words the similarity is 0.  Without a table the bundled
    vectors are used; if those are unavailable too, falls back to Jaccard
    overlap of the stop-word-filtered token sets.
    """
    if table is None:
        table = _default_table()
    if table is None:
        global _warned_fallback
        if not _warned_fallback:
            log.warning("no embedding table loaded; "
                        "falling back to token-overlap similarity")
            _warned_fallback = True
        stop = default_stop_words()
        sa = {t for t in token_texts(a) if t not in stop}
        sb = {t for t in token_texts(b) if t not in stop}
        if not sa or not sb:
            return 0.0
        return len(sa & sb) / len(sa | sb)
    va = _average_vector(a, table)
    vb = _average_vector(b, table)
    if va is None or vb is None:
        return 0.0
    dot = sum(x * y for x, y in zip(va, vb))
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def _average_vector(text: str,
                    table: EmbeddingTable) -> Optional[list[float]]:
    words = [t for t in token_texts(text)
             if t not in table.stop_words and t in table.vectors]
    if not words:
        return None
    acc = [0.0] * table.dim
    for word in words:
        vec = table.vectors[word]
        for i, v in enumerate(vec):
            acc[i] += v
    return [v / len(words) for v in acc]


# rewrite synthesis -------------------------------------------------------------

def rewrites(program, w: GridWorld,
             cap: int = CANDIDATE_CAP) -> list[RewriteCandidate]:
    """All trace-preserving rewritings of the program on this world."""
    base = execute(program, w, collect_contexts=True)
    if base.trace.warnings:
        return []
    base_steps = list(base.trace.steps)
    seen = {pretty(program)}
    results: list[RewriteCandidate] = []
    frontier: list[tuple[object, tuple[str, ...]]] = [(program, ())]
    while frontier and len(results) < cap:
        prog, provenance = frontier.pop(0)
        contexts = execute(prog, w, collect_contexts=True).contexts
        for new_prog, tag in _region_rewrites(prog, "", contexts):
            text = pretty(new_prog)
            if text in seen:
                continue
            seen.add(text)
            check = execute(new_prog, w)
            if check.trace.warnings or list(check.trace.steps) != base_steps:
                continue
            cand = RewriteCandidate(new_prog, provenance + (tag,), check.trace)
            results.append(cand)
            frontier.append((new_prog, cand.provenance))
            if len(results) >= cap:
                break
    return results


def _flatten(node, path: str) -> list[tuple[object, str]]:
    # right-nested statement chain -> elements with their execution paths
    out = []
    while isinstance(node, Seq):
        out.append((node.first, path + "/first"))
        node, path = node.second, path + "/second"
    out.append((node, path))
    return out


def _rebuild(stmts: list) -> object:
    node = stmts[-1]
    for s in reversed(stmts[:-1]):
        node = Seq(s, node)
    return node


def _once(path: str, contexts) -> bool:
    return contexts is not None and len(contexts.get(path, ())) == 1


def _region_rewrites(region, path: str, contexts) -> list[tuple[object, str]]:
    """Single-site rewrites of one statement chain, recursing into bodies."""
    elems = _flatten(region, path)
    stmts = [s for s, _ in elems]
    n = len(stmts)
    out: list[tuple[object, str]] = []

    # identical consecutive statements -> loop
    i = 0
    while i < n:
        j = i + 1
        while j < n and stmts[j] == stmts[i]:
            j += 1
        if j - i >= 2:
            rewritten = stmts[:i] + [Repeat(j - i, stmts[i])] + stmts[j:]
            out.append((_rebuild(rewritten), "loop"))
        i = j

    # movement runs -> visit the end point, by coordinates or item predicate
    i = 0
    while i < n:
        if isinstance(stmts[i], Move) and _once(elems[i][1], contexts):
            j = i
            while (j + 1 < n and isinstance(stmts[j + 1], Move)
                   and _once(elems[j + 1][1], contexts)):
                j += 1
            _, after, _ = contexts[elems[j][1]][0]
            px, py = after.robot.position
            repls = [Visit(PointLit(px, py))]
            here = items_at(after, (px, py))
            if here:
                for itm in _conjunction_queries(here):
                    repls.append(Visit(Containing(World(), itm)))
            for repl in repls:
                rewritten = stmts[:i] + [repl] + stmts[j + 1:]
                out.append((_rebuild(rewritten), "visit"))
            i = j + 1
        else:
            i += 1

    # same-kind pick/drop runs -> one quantified action over exactly those items
    i = 0
    while i < n:
        s = stmts[i]
        if isinstance(s, ItemAction) and _once(elems[i][1], contexts):
            kind = s.kind
            j = i
            while (j + 1 < n and isinstance(stmts[j + 1], ItemAction)
                   and stmts[j + 1].kind == kind
                   and _once(elems[j + 1][1], contexts)):
                j += 1
            before = contexts[elems[i][1]][0][0]
            acted: list[str] = []
            for k in range(i, j + 1):
                acted.extend(st.item for st in contexts[elems[k][1]][0][2])
            if acted:
                scope = (items_at(before, before.robot.position)
                         if kind == "pick" else held_items(before))
                acted_set = set(acted)
                acted_items = [before.items[iid] for iid in acted]
                for itm in _conjunction_queries(acted_items):
                    selected = {it.id for it in scope if matches(itm, it)}
                    if selected != acted_set:
                        continue
                    repl = ItemAction(kind, Every(itm))
                    rewritten = stmts[:i] + [repl] + stmts[j + 1:]
                    out.append((_rebuild(rewritten), "every"))
            i = j + 1
        else:
            i += 1

    # one site at a time inside compound statements
    for idx, (s, spath) in enumerate(elems):
        body = getattr(s, "body", None)
        if body is None:
            continue
        for new_body, tag in _region_rewrites(body, spath + "/body", contexts):
            rewritten = stmts[:idx] + [_with_body(s, new_body)] + stmts[idx + 1:]
            out.append((_rebuild(rewritten), tag))
    return out


def _with_body(node, body):
    if isinstance(node, Repeat):
        return Repeat(node.count, body)
    if isinstance(node, Foreach):
        return Foreach(node.area, body)
    if isinstance(node, If):
        return If(node.cond, body)
    if isinstance(node, While):
        return While(node.cond, body)
    if isinstance(node, Strict):
        return Strict(body)
    raise TypeError(f"no statement body on {type(node).__name__}")


def _conjunction_queries(items) -> list:
    """Item queries (unconstrained, color, shape, color-and-shape) drawn from
    the given items' properties, in a fixed order."""
    pairs = {(it.color, it.shape) for it in items}
    out: list = [AnyItem()]
    for c in COLORS:
        if any(pc == c for pc, _ in pairs):
            out.append(Filtered(Is(Color(c))))
    for s in SHAPES:
        if any(ps == s for _, ps in pairs):
            out.append(Filtered(Is(Shape(s))))
    for c in COLORS:
        for s in SHAPES:
            if (c, s) in pairs:
                out.append(Filtered(FltrAnd(Is(Color(c)), Is(Shape(s)))))
    return out


# winner selection ---------------------------------------------------------------

def generalize(x_text: str, y_text: str, user: str, w: GridWorld,
               rules: Sequence[GrammarRule],
               params: Optional[semparse.ModelParams] = None,
               embeddings: Optional[EmbeddingTable] = None) -> GeneralizeResult:
    """Pick the best-scoring definition among the user's and its rewritings.

    Raises semparse.NoParse when the definition does not parse and
    UnrealizableDefinition when it executes with warnings.
    """
    params = params or semparse.ModelParams()
    y_program = semparse.parse(y_text, user, rules, params)[0].value
    outcome = execute(y_program, w)
    if outcome.trace.warnings:
        raise UnrealizableDefinition(outcome.trace.warnings)

    candidates = rewrites(y_program, w)
    pool: list[tuple[object, str, tuple[str, ...]]] = [(y_program, y_text, ())]
    pool.extend((c.program, pretty(c.program), c.provenance) for c in candidates)

    best = None
    for program, text, provenance in pool:
        prob = semparse.program_probability(program, text, user, rules, params)
        similarity = sim(text, x_text, embeddings)
        entry = (prob, similarity, text, program, provenance)
        if best is None or _better(entry, best):
            best = entry
    _, _, text, program, provenance = best
    return GeneralizeResult(program=program, text=text,
                            changed=bool(provenance),
                            candidates=tuple(candidates))


def _better(a: tuple, b: tuple) -> bool:
    """Lexicographic on (model, similarity), near-ties broken by shorter
    then lexicographically smaller text."""
    if a[0] > b[0] + SCORE_EPSILON:
        return True
    if a[0] < b[0] - SCORE_EPSILON:
        return False
    if a[1] > b[1] + SCORE_EPSILON:
        return True
    if a[1] < b[1] - SCORE_EPSILON:
        return False
    return (len(a[2]), a[2]) < (len(b[2]), b[2])
