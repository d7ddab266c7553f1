"""Session service and the HTTP/WebSocket API.

The interactive loop: an utterance is parsed into up to three candidate
programs, each previewed by simulating its trace on a copy of the session
world; choosing one commits its trace, nudges the ranking model toward the
choice, and persists the new weights.  Utterances the grammar cannot parse go
through define: the definition is generalized on the current world, rules are
induced from the (utterance, generalized definition) pair, and stored.

All state changes flow through SessionService, which also powers session-log
replay; the FastAPI app is a thin JSON layer on top.
"""
from __future__ import annotations

import asyncio
import hashlib
import itertools
import json
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from fastapi import FastAPI, Header, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import induct, semparse
from .executor import Trace, execute, trace_to_json
from .generalize import EmbeddingTable, UnrealizableDefinition, generalize
from .lang.grammar import GrammarRule, core_rules, rule_to_json
from .lang.pretty import pretty
from .store import (CoreRuleImmutable, DuplicateRule, NotFound, NotOwner,
                    Store)
from .world import GridWorld, step as apply_step, step_to_json, world_to_json

CANDIDATE_TTL_SECONDS = 600.0
MAX_CANDIDATES = 3


class Conflict(Exception):
    pass


class BadRequest(Exception):
    def __init__(self, message: str, detail: Optional[dict] = None):
        super().__init__(message)
        self.detail = detail or {}


@dataclass
class Candidate:
    id: str
    program: object
    text: str
    score: float
    prob: float
    trace: Trace
    final_world: GridWorld


@dataclass
class _Pending:
    utterance: str
    derivations: list  # the derivations shown, for the model update
    entries: list[Candidate]
    created_at: float


@dataclass
class Session:
    id: str
    user: str
    world: GridWorld
    pending: Optional[_Pending] = None
    seen_keys: dict = field(default_factory=dict)  # idempotency key -> response
    subscribers: list = field(default_factory=list)  # asyncio queues of WS frames


class SessionService:
    def __init__(self, store: Store,
                 embeddings: Optional[EmbeddingTable] = None,
                 clock: Callable[[], float] = time.monotonic):
        self.store = store
        self.embeddings = embeddings
        self.clock = clock
        self.params = store.load_params()
        self.sessions: dict[str, Session] = {}
        self._ids = itertools.count(1)
        self._grammar_version = 0
        self._grammar_cache: dict[tuple, tuple[int, list[GrammarRule]]] = {}

    # grammar ---------------------------------------------------------------

    def grammar_for(self, w: GridWorld) -> list[GrammarRule]:
        """Core rules for this world's named areas plus all stored rules,
        compiled in creation order."""
        key = tuple(sorted(w.named_areas))
        cached = self._grammar_cache.get(key)
        if cached and cached[0] == self._grammar_version:
            return cached[1]
        rules = list(core_rules(named_areas=key))
        for stored in self.store.list_rules():
            try:
                rules.append(semparse.compile_rule(stored, rules))
            except semparse.TemplateError:
                continue  # rule body refers to areas this world lacks
        self._grammar_cache[key] = (self._grammar_version, rules)
        return rules

    def _bump_grammar(self) -> None:
        self._grammar_version += 1

    # sessions ----------------------------------------------------------------

    def create_session(self, world_id: str, user: str,
                       session_id: Optional[str] = None) -> Session:
        if not user.strip():
            raise BadRequest("user must be non-empty")
        w = self.store.load_world(world_id)
        sid = session_id or f"s{next(self._ids)}"
        if sid in self.sessions:
            raise Conflict(f"session {sid} already exists")
        session = Session(id=sid, user=user, world=w)
        self.sessions[sid] = session
        self.store.append_session_event(sid, {
            "type": "create", "session": sid,
            "world_id": world_id, "user": user})
        return session

    def _session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFound(f"no session {session_id}")
        return session

    # the interactive loop -------------------------------------------------------

    def utterance(self, session_id: str, text: str) -> dict:
        session = self._session(session_id)
        if not text.strip():
            raise BadRequest("utterance must be non-empty")
        grammar = self.grammar_for(session.world)
        try:
            ranked = semparse.parse(text, session.user, grammar, self.params)
        except semparse.NoParse:
            session.pending = None
            self.store.append_session_event(session.id, {
                "type": "utterance", "text": text, "unparsable": True})
            return {"status": "unparsable"}

        deduped = []
        seen_programs = []
        for deriv in ranked:
            if deriv.value in seen_programs:
                continue
            seen_programs.append(deriv.value)
            deduped.append(deriv)
            if len(deduped) == MAX_CANDIDATES:
                break
        probs = semparse.probabilities(deduped)
        entries = []
        for i, (deriv, prob) in enumerate(zip(deduped, probs)):
            outcome = execute(deriv.value, session.world)
            entries.append(Candidate(
                id=f"c{i}", program=deriv.value, text=pretty(deriv.value),
                score=deriv.score, prob=prob, trace=outcome.trace,
                final_world=outcome.trace.final))
        session.pending = _Pending(utterance=text, derivations=deduped,
                                   entries=entries, created_at=self.clock())
        self.store.append_session_event(session.id, {
            "type": "utterance", "text": text,
            "candidates": [{"id": e.id, "text": e.text, "score": e.score}
                           for e in entries]})
        return {"candidates": [self._candidate_json(e) for e in entries]}

    @staticmethod
    def _candidate_json(e: Candidate) -> dict:
        return {"id": e.id, "program_text": e.text, "score": e.score,
                "prob": e.prob, "trace": trace_to_json(e.trace)}

    def choose(self, session_id: str, candidate_id: str,
               idempotency_key: Optional[str] = None) -> dict:
        session = self._session(session_id)
        if idempotency_key is not None and idempotency_key in session.seen_keys:
            return session.seen_keys[idempotency_key]
        pending = session.pending
        if pending is None:
            raise Conflict("no pending candidates")
        if self.clock() - pending.created_at > CANDIDATE_TTL_SECONDS:
            session.pending = None
            raise Conflict("candidates expired")
        index = next((i for i, e in enumerate(pending.entries)
                      if e.id == candidate_id), None)
        if index is None:
            raise NotFound(f"no candidate {candidate_id}")
        entry = pending.entries[index]

        frames = self._animation_frames(session.world, entry.trace)
        session.world = entry.final_world
        session.pending = None
        self.params = semparse.update(self.params, pending.derivations,
                                      index, session.user)
        self.store.save_params(self.params)
        theta_id = hashlib.sha1(json.dumps(
            sorted(self.params.weights.items())).encode()).hexdigest()[:12]
        self.store.append_session_event(session.id, {
            "type": "choose", "candidate_id": candidate_id,
            "theta": theta_id})
        for queue in list(session.subscribers):
            for frame in frames:
                queue.put_nowait(frame)
        response = {"world": world_to_json(session.world),
                    "trace": trace_to_json(entry.trace)}
        if idempotency_key is not None:
            session.seen_keys[idempotency_key] = response
        return response

    @staticmethod
    def _animation_frames(start: GridWorld, trace: Trace) -> list[dict]:
        frames = []
        w = start
        for s in trace.steps:
            before, w = w, apply_step(w, s)
            frames.append({"type": "step", "step": step_to_json(s),
                           "world_diff": _world_diff(before, w)})
        return frames

    def define(self, session_id: str, utterance: str, definition: str) -> dict:
        session = self._session(session_id)
        if not utterance.strip() or not definition.strip():
            raise BadRequest("utterance and definition must be non-empty")
        grammar = self.grammar_for(session.world)
        try:
            result = generalize(utterance, definition, session.user,
                                session.world, grammar, self.params,
                                self.embeddings)
        except semparse.NoParse as e:
            raise BadRequest("definition does not parse",
                             {"position": e.position, "expected": e.expected})
        except UnrealizableDefinition as e:
            raise BadRequest("definition is not fully realizable", {
                "warnings": [{"path": w.path, "reason": w.reason}
                             for w in e.warnings]})
        _, new_rules = induct.induce(utterance, result.text, session.user,
                                     grammar, self.params)
        snapshot = self.store.save_world_snapshot(session.world)
        stored_rules = []
        for rule in new_rules:
            origin = "induced-generalized" if result.changed else rule.origin
            stored_rules.append(replace(rule, origin=origin, context=snapshot))
        if stored_rules:
            self.store.add_rules(stored_rules)
            self._bump_grammar()
        self.store.append_session_event(session.id, {
            "type": "define", "utterance": utterance,
            "definition": definition,
            "generalized_from": result.text,
            "rule_ids": [r.id for r in stored_rules]})
        return {"induced_rules": [rule_to_json(r) for r in stored_rules],
                "generalized_from": result.text}

    # rules ------------------------------------------------------------------

    def rules(self) -> list[dict]:
        return [rule_to_json(r) for r in self.store.list_rules()]

    def delete_rule(self, rule_id: str, user: str) -> None:
        # core rules exist only in the grammar, never in the store; named-area
        # rules are generated per world and are equally built in
        if rule_id.startswith("area-named-") or \
                any(r.id == rule_id for r in core_rules()):
            raise CoreRuleImmutable(f"rule {rule_id} is a core rule")
        self.store.delete_rule(rule_id, user)
        self._bump_grammar()

    # replay -----------------------------------------------------------------

    def apply_event(self, event: dict) -> object:
        """Dispatch one recorded session event; used by log replay."""
        kind = event["type"]
        if kind == "create":
            return self.create_session(event["world_id"], event["user"],
                                       session_id=event["session"])
        session_id = event.get("session") or self._only_session_id()
        if kind == "utterance":
            return self.utterance(session_id, event["text"])
        if kind == "choose":
            return self.choose(session_id, event["candidate_id"],
                               event.get("key"))
        if kind == "define":
            return self.define(session_id, event["utterance"],
                               event["definition"])
        raise ValueError(f"unknown event type {kind}")

    def _only_session_id(self) -> str:
        if len(self.sessions) != 1:
            raise ValueError("event names no session and several are open")
        return next(iter(self.sessions))


def replay_session(events: list[dict], store: Store,
                   embeddings: Optional[EmbeddingTable] = None) -> SessionService:
    """Re-run a recorded event log against a fresh store."""
    service = SessionService(store, embeddings=embeddings)
    for event in events:
        service.apply_event(event)
    return service


def _world_diff(before: GridWorld, after: GridWorld) -> dict:
    diff: dict = {}
    if before.robot.position != after.robot.position:
        diff["robot"] = list(after.robot.position)
    items: dict = {}
    for iid, item in after.items.items():
        old = before.items.get(iid)
        if old is None or old.position != item.position:
            if item.position is None:
                items[iid] = {"held": True}
            else:
                items[iid] = {"x": item.position[0], "y": item.position[1]}
    if items:
        diff["items"] = items
    return diff


def seed_worlds(store: Store) -> None:
    """Copy the bundled fixture worlds into the data directory if absent."""
    fixtures = resources.files("flipper").joinpath("data/worlds")
    for entry in fixtures.iterdir():
        if not entry.name.endswith(".json"):
            continue
        target = store.root / "worlds" / entry.name
        if not target.exists():
            target.write_text(entry.read_text())


# HTTP layer ---------------------------------------------------------------------

class SessionBody(BaseModel):
    world_id: str
    user: str


class UtteranceBody(BaseModel):
    session: str
    text: str


class ChooseBody(BaseModel):
    session: str
    candidate_id: str
    idempotency_key: Optional[str] = None


class DefineBody(BaseModel):
    session: str
    utterance: str
    definition: str


def make_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="flipper")
    app.state.service = service

    @app.exception_handler(NotFound)
    async def _not_found(_, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(Conflict)
    async def _conflict(_, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(BadRequest)
    async def _bad_request(_, exc):
        return JSONResponse(status_code=422,
                            content={"error": str(exc), **exc.detail})

    @app.exception_handler(NotOwner)
    async def _not_owner(_, exc):
        return JSONResponse(status_code=403, content={"error": str(exc)})

    @app.exception_handler(CoreRuleImmutable)
    async def _immutable(_, exc):
        return JSONResponse(status_code=403, content={"error": str(exc)})

    @app.exception_handler(DuplicateRule)
    async def _duplicate(_, exc):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.post("/api/session")
    async def create_session(body: SessionBody):
        session = service.create_session(body.world_id, body.user)
        return {"session_id": session.id,
                "world": world_to_json(session.world)}

    @app.post("/api/utterance")
    async def utterance(body: UtteranceBody):
        return service.utterance(body.session, body.text)

    @app.post("/api/choose")
    async def choose(body: ChooseBody):
        return service.choose(body.session, body.candidate_id,
                              body.idempotency_key)

    @app.post("/api/define")
    async def define(body: DefineBody):
        return service.define(body.session, body.utterance, body.definition)

    @app.get("/api/rules")
    async def rules():
        return {"rules": service.rules()}

    @app.delete("/api/rules/{rule_id}")
    async def delete_rule(rule_id: str, x_user: str = Header(default="")):
        if not x_user:
            raise BadRequest("X-User header required")
        service.delete_rule(rule_id, x_user)
        return {"ok": True}

    @app.get("/api/session/{session_id}/world")
    async def session_world(session_id: str):
        return {"world": world_to_json(service._session(session_id).world)}

    @app.websocket("/api/ws/{session_id}")
    async def ws(websocket: WebSocket, session_id: str):
        session = service.sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(queue)
        try:
            while True:
                frame = await queue.get()
                await websocket.send_json(frame)
        except WebSocketDisconnect:
            pass
        finally:
            if queue in session.subscribers:
                session.subscribers.remove(queue)

    return app


def build_server(data_dir: str, embeddings_path: Optional[str] = None):
    store = Store(Path(data_dir))
    seed_worlds(store)
    embeddings = (EmbeddingTable.load(embeddings_path)
                  if embeddings_path else None)
    service = SessionService(store, embeddings=embeddings)
    return make_app(service)
