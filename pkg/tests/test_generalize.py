"""Definition rewriting and the (model probability, text similarity) score.

The similarity oracle below recomputes cosines straight from the bundled
data files so the library's arithmetic is checked against plain math.
"""
from __future__ import annotations

import logging
import math
from importlib import resources

import pytest

import flipper.generalize as gz
import flipper.lang.ast as A
from conftest import make_world
from flipper.executor import execute
from flipper.generalize import (EmbeddingTable, UnrealizableDefinition,
                                bundled_embeddings, default_stop_words,
                                generalize, rewrites, sim)
from flipper.lang import core_rules, parse_core, pretty, token_texts
from flipper.semparse import NoParse

CORE = list(core_rules())

X_VISIT = "visit red triangle"
WINNER = "visit world containing item is red and is triangle"
RIVAL_MEANINGS = [
    "visit [4, 0]",
    "visit world containing item",
    "visit world containing item is red",
    WINNER,
]


def oracle_cosine(a: str, b: str) -> float:
    """Average-vector cosine recomputed from the raw data files."""
    words = {}
    table = resources.files("flipper").joinpath("data/embeddings-100d.txt").read_text()
    for line in table.splitlines():
        parts = line.split()
        words[parts[0]] = [float(v) for v in parts[1:]]
    stops = set(resources.files("flipper").joinpath("data/stopwords.txt").read_text().split())

    def avg(text):
        keep = [words[t] for t in token_texts(text) if t not in stops and t in words]
        if not keep:
            return None
        return [sum(col) / len(keep) for col in zip(*keep)]

    va, vb = avg(a), avg(b)
    if va is None or vb is None:
        return 0.0
    dot = sum(x * y for x, y in zip(va, vb))
    return dot / (math.sqrt(sum(x * x for x in va)) * math.sqrt(sum(x * x for x in vb)))


# --- similarity ---

@pytest.mark.parametrize("text, frozen", [
    ("move right", -0.096218),
    ("visit [4, 0]", 0.450680),
    ("visit world containing item", 0.243398),
    ("visit world containing item is red", 0.483457),
    ("visit world containing item is triangle", 0.481421),
    (WINNER, 0.685263),
])
def test_similarity_matches_the_frozen_table(text, frozen):
    got = sim(text, X_VISIT)
    assert got == pytest.approx(frozen, abs=1e-6)
    assert got == pytest.approx(oracle_cosine(text, X_VISIT), abs=1e-9)


def test_similarity_is_symmetric_and_bounded():
    texts = [X_VISIT, *RIVAL_MEANINGS, "drop 3 times", "pick every item"]
    for a in texts:
        for b in texts:
            got = sim(a, b)
            assert got == pytest.approx(sim(b, a), abs=1e-12)
            assert -1.0 - 1e-9 <= got <= 1.0 + 1e-9


def test_identical_texts_have_similarity_one():
    assert sim(X_VISIT, X_VISIT) == pytest.approx(1.0, abs=1e-9)


def test_stop_word_only_text_has_zero_similarity():
    assert sim("is and or", "to at up") == 0.0
    assert sim("is and or", X_VISIT) == 0.0


def test_unknown_words_are_ignored():
    assert sim("visit zyzzyva red triangle", X_VISIT) == \
        pytest.approx(sim(X_VISIT, X_VISIT), abs=1e-12)


def test_bag_of_words_ignores_order_but_weighs_repeats():
    assert sim("red triangle visit", X_VISIT) == pytest.approx(1.0, abs=1e-9)
    # a bag is a multiset: repeated words shift the average vector
    repeated = sim("visit visit red red triangle", X_VISIT)
    assert repeated == pytest.approx(oracle_cosine("visit visit red red triangle", X_VISIT), abs=1e-9)
    assert repeated < 1.0


def test_bundled_table_has_the_documented_shape():
    table = bundled_embeddings()
    assert table.dim == 100
    assert len(table.vectors) >= 250
    assert "triangle" in table.vectors and "visit" in table.vectors


def test_mixed_dimension_tables_are_rejected():
    with pytest.raises(ValueError):
        EmbeddingTable({"a": (1.0, 2.0), "b": (1.0,)}, frozenset())


def test_stop_list_keeps_content_words():
    stops = default_stop_words()
    assert {"is", "and", "or", "not", "every", "each", "to", "at"} <= stops
    for word in ("times", "item", "items", "repeat", "visit", "world", "red"):
        assert word not in stops


def test_fallback_overlap_when_no_table_is_available(monkeypatch, caplog):
    def missing():
        raise OSError("no file")

    monkeypatch.setattr(gz, "bundled_embeddings", missing)
    monkeypatch.setattr(gz, "_warned_fallback", False)
    gz._default_table.cache_clear()
    try:
        with caplog.at_level(logging.WARNING):
            got = sim("drop every item", "drop 3 times")
            sim("move up", "move up")
        # |{drop}| / |{drop, item, 3, times}|
        assert got == pytest.approx(0.25)
        warnings = [r for r in caplog.records if "falling back" in r.message]
        assert len(warnings) == 1
    finally:
        gz._default_table.cache_clear()


# --- rewrite synthesis ---

def drop3_world():
    return make_world(3, 1, items=[
        {"id": "a", "color": "red", "shape": "circle"},
        {"id": "b", "color": "blue", "shape": "star"},
        {"id": "c", "color": "green", "shape": "square"}],
        holding=["a", "b", "c"])


def test_rewrites_fold_identical_statements_into_a_loop():
    program = parse_core("drop item; drop item; drop item")
    texts = {pretty(c.program) for c in rewrites(program, drop3_world())}
    assert "repeat 3 times drop item" in texts
    assert "drop every item" in texts


def test_rewrites_preserve_the_base_trace():
    w = drop3_world()
    program = parse_core("drop item; drop item; drop item")
    base = execute(program, w).trace.steps
    for cand in rewrites(program, w):
        assert execute(cand.program, w).trace.steps == base
        assert cand.trace.steps == base
        assert cand.trace.warnings == []


def test_rewrites_turn_moves_into_visits(corridor):
    program = parse_core("move right")
    texts = {pretty(c.program) for c in rewrites(program, corridor)}
    assert "visit [4, 0]" in texts
    assert WINNER in texts


def test_rewrites_turn_pick_runs_into_item_queries():
    w = make_world(2, 1, items=[
        {"id": "a", "color": "blue", "shape": "circle", "x": 0, "y": 0},
        {"id": "b", "color": "blue", "shape": "star", "x": 0, "y": 0}])
    program = parse_core("pick item is blue; pick item is blue")
    texts = {pretty(c.program) for c in rewrites(program, w)}
    assert "pick every item is blue" in texts


def test_unrealizable_programs_have_no_rewrites(corridor):
    assert rewrites(parse_core("pick item"), corridor) == []


def test_rewrite_candidates_are_unique_and_capped(corridor):
    cands = rewrites(parse_core("move right"), corridor)
    texts = [pretty(c.program) for c in cands]
    assert len(texts) == len(set(texts))
    assert len(cands) <= gz.CANDIDATE_CAP


def test_rewrites_inside_loops_require_repetition_not_coincidence():
    # two different statements do not fold into a loop
    w = make_world(3, 1)
    texts = {pretty(c.program) for c in rewrites(parse_core("move right; move left"), w)}
    assert not any(t.startswith("repeat") for t in texts)


# --- full generalization ---

def test_definition_generalizes_to_the_predicate_visit(corridor):
    res = generalize(X_VISIT, "move right", "ann", corridor, CORE)
    assert res.changed
    assert res.text == WINNER
    texts = {pretty(c.program) for c in res.candidates}
    for alt in RIVAL_MEANINGS:
        assert alt in texts
    assert pretty(res.program) == WINNER


def test_sequence_of_drops_generalizes_to_a_loop():
    res = generalize("drop 3 times", "drop item; drop item; drop item", "ann",
                     drop3_world(), CORE)
    assert res.changed
    assert res.text == "repeat 3 times drop item"


def test_double_pick_generalizes_to_every():
    w = make_world(2, 1, items=[
        {"id": "a", "color": "blue", "shape": "circle", "x": 0, "y": 0},
        {"id": "b", "color": "blue", "shape": "star", "x": 0, "y": 0}])
    res = generalize("pick blue items", "pick item is blue; pick item is blue",
                     "ann", w, CORE)
    assert res.changed
    assert res.text == "pick every item is blue"


def test_already_general_definitions_stay_put(corridor):
    res = generalize(X_VISIT, WINNER, "ann", corridor, CORE)
    assert not res.changed
    assert res.text == WINNER


def test_unrealizable_definition_is_rejected_with_warnings(corridor):
    with pytest.raises(UnrealizableDefinition) as err:
        generalize("grab", "pick item", "ann", corridor, CORE)
    (warning,) = err.value.warnings
    assert warning.reason == "no matching item here"


def test_unparsable_definition_raises_no_parse(corridor):
    with pytest.raises(NoParse):
        generalize("grab", "pick the item", "ann", corridor, CORE)


def test_generalize_is_deterministic(corridor):
    a = generalize(X_VISIT, "move right", "ann", corridor, CORE)
    b = generalize(X_VISIT, "move right", "ann", corridor, CORE)
    assert a.text == b.text
    assert [pretty(c.program) for c in a.candidates] == \
        [pretty(c.program) for c in b.candidates]
