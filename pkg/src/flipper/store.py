"""Durable state: grammar rules, model parameters, worlds, session logs.

Layout under one data directory:
  rules.jsonl    append-only rule events ({"event": "add"|"delete", ...})
  params.json    feature weights, written atomically
  worlds/        world snapshots, content-addressed plus named fixtures
  sessions/      one append-only JSONL event log per session

All mutations are serialized through a per-store lock and flushed to disk
before the call returns; reopening a store replays the logs.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Iterable, Optional

from . import semparse
from .lang.grammar import GrammarRule, rule_from_json, rule_to_json
from .world import GridWorld, world_from_json, world_to_json

log = logging.getLogger(__name__)


class StoreError(Exception):
    pass


class DuplicateRule(StoreError):
    pass


class NotFound(StoreError):
    pass


class NotOwner(StoreError):
    pass


class CoreRuleImmutable(StoreError):
    pass


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "worlds").mkdir(exist_ok=True)
        (self.root / "sessions").mkdir(exist_ok=True)
        self._lock = threading.Lock()
        self._rules: dict[str, GrammarRule] = {}  # insertion order = creation order
        self._replay_rules()

    # rules ---------------------------------------------------------------

    @property
    def _rules_path(self) -> Path:
        return self.root / "rules.jsonl"

    def _replay_rules(self) -> None:
        if not self._rules_path.exists():
            return
        lines = self._rules_path.read_text(encoding="utf-8").splitlines()
        for no, line in enumerate(lines):
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                # a torn final line is the footprint of an append cut short
                # by a crash; damage anywhere else is real corruption
                if no == len(lines) - 1:
                    log.warning("ignoring torn trailing entry in %s",
                                self._rules_path)
                    break
                raise
            if event["event"] == "add":
                rule = rule_from_json(event["rule"])
                self._rules[rule.id] = rule
            elif event["event"] == "delete":
                self._rules.pop(event["id"], None)

    def _append_rule_event(self, event: dict) -> None:
        with open(self._rules_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def add_rules(self, rules: Iterable[GrammarRule]) -> list[str]:
        """Appends each rule durably; the rule's author field is the owner."""
        rules = list(rules)
        with self._lock:
            for rule in rules:
                if rule.id in self._rules:
                    raise DuplicateRule(f"rule {rule.id} already stored")
            for rule in rules:
                self._append_rule_event({"event": "add",
                                         "rule": rule_to_json(rule)})
                self._rules[rule.id] = rule
        return [r.id for r in rules]

    def delete_rule(self, rule_id: str, user: str) -> None:
        with self._lock:
            rule = self._rules.get(rule_id)
            if rule is None:
                raise NotFound(f"no rule {rule_id}")
            if rule.origin == "core":
                raise CoreRuleImmutable(f"rule {rule_id} is a core rule")
            if rule.author != user:
                raise NotOwner(f"rule {rule_id} belongs to {rule.author}")
            self._append_rule_event({"event": "delete", "id": rule_id,
                                     "author": user})
            del self._rules[rule_id]

    def list_rules(self, author: Optional[str] = None,
                   origin: Optional[str] = None) -> list[GrammarRule]:
        out = list(self._rules.values())
        if author is not None:
            out = [r for r in out if r.author == author]
        if origin is not None:
            out = [r for r in out if r.origin == origin]
        return out

    def get_rule(self, rule_id: str) -> GrammarRule:
        rule = self._rules.get(rule_id)
        if rule is None:
            raise NotFound(f"no rule {rule_id}")
        return rule

    # model parameters ------------------------------------------------------

    @property
    def _params_path(self) -> Path:
        return self.root / "params.json"

    def load_params(self) -> semparse.ModelParams:
        if not self._params_path.exists():
            return semparse.ModelParams()
        data = json.loads(self._params_path.read_text())
        return semparse.ModelParams(
            weights=data.get("weights", {}),
            learning_rate=data.get("learning_rate",
                                   semparse.DEFAULT_LEARNING_RATE),
            beam_size=data.get("beam_size", semparse.DEFAULT_BEAM_SIZE))

    def save_params(self, params: semparse.ModelParams) -> None:
        payload = {"weights": dict(sorted(params.weights.items())),
                   "learning_rate": params.learning_rate,
                   "beam_size": params.beam_size}
        blob = json.dumps(payload, sort_keys=True, indent=1)
        with self._lock:
            tmp = self._params_path.with_suffix(".json.tmp")
            tmp.write_text(blob)
            os.replace(tmp, self._params_path)

    # worlds -----------------------------------------------------------------

    def save_world_snapshot(self, w: GridWorld) -> str:
        """Content-addressed world snapshot; returns its id."""
        blob = json.dumps(world_to_json(w), sort_keys=True)
        snap_id = "w" + hashlib.sha1(blob.encode()).hexdigest()[:12]
        path = self.root / "worlds" / f"{snap_id}.json"
        if not path.exists():
            with self._lock:
                tmp = path.with_suffix(".json.tmp")
                tmp.write_text(blob)
                os.replace(tmp, path)
        return snap_id

    def load_world(self, name: str) -> GridWorld:
        path = self.root / "worlds" / f"{name}.json"
        if not path.exists():
            raise NotFound(f"no world {name}")
        return world_from_json(json.loads(path.read_text()))

    def list_worlds(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "worlds").glob("*.json"))

    def save_world(self, name: str, w: GridWorld) -> None:
        path = self.root / "worlds" / f"{name}.json"
        with self._lock:
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(world_to_json(w), sort_keys=True))
            os.replace(tmp, path)

    # session logs -------------------------------------------------------------

    def append_session_event(self, session_id: str, event: dict) -> None:
        path = self.root / "sessions" / f"{session_id}.jsonl"
        with self._lock:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def read_session_events(self, session_id: str) -> list[dict]:
        path = self.root / "sessions" / f"{session_id}.jsonl"
        if not path.exists():
            raise NotFound(f"no session log {session_id}")
        events = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "sessions").glob("*.jsonl"))
