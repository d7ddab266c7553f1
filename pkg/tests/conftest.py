"""Shared fixtures: bundled demo worlds, fresh stores, and a summary hook
that prints one PASS/FAIL line per end-to-end criterion in test_acceptance.py.
"""
from __future__ import annotations

import json
from importlib import resources

import pytest

from flipper.store import Store
from flipper.world import GridWorld, world_from_json

QUAD_AREAS = ("room1", "room2", "room3", "room4")


def bundled_world(name: str) -> GridWorld:
    text = resources.files("flipper").joinpath(f"data/worlds/{name}.json").read_text()
    return world_from_json(json.loads(text))


def make_world(width: int, height: int, *, obstacles=(), items=(), robot=(0, 0),
               holding=(), named_areas=None) -> GridWorld:
    """Compact inline-world builder for tests."""
    return world_from_json({
        "width": width,
        "height": height,
        "obstacles": [list(p) for p in obstacles],
        "items": [dict(it) for it in items],
        "robot": {"x": robot[0], "y": robot[1], "holding": list(holding)},
        "named_areas": {k: [list(p) for p in v] for k, v in (named_areas or {}).items()},
    })


@pytest.fixture
def corridor() -> GridWorld:
    return bundled_world("corridor")


@pytest.fixture
def quad() -> GridWorld:
    return bundled_world("quad")


@pytest.fixture
def store(tmp_path) -> Store:
    return Store(tmp_path / "data")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    stats = terminalreporter.stats
    reports = [r for key in ("passed", "failed") for r in stats.get(key, [])
               if getattr(r, "when", None) == "call" and "test_acceptance" in r.nodeid]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for rep in sorted(reports, key=lambda r: r.nodeid):
        name = rep.nodeid.rsplit("::", 1)[-1]
        verdict = "PASS" if rep.passed else "FAIL"
        terminalreporter.write_line(f"[acceptance] {name}: {verdict}")
