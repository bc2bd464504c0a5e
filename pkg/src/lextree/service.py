"""JSON-over-HTTP consultation service.

One tree per server instance, loaded read-only at startup. Sessions live in
memory behind a lock; every update names the version it expects, and a
mismatch is rejected with a 409-style conflict instead of last-write-wins.
Idle sessions are evicted after 24 hours, but a client holding its answered
steps can always restore one via the replay field of POST /api/session.

Endpoints (bodies JSON, `format_version: 1`):

    GET  /api/tree                  compiled tree + stats
    POST /api/check                 analysis report for the loaded document
    POST /api/eval                  {facts} -> trace
    POST /api/session               {replay?} -> {session_id, version, status}
    GET  /api/session/{id}          {version, status, answered}
    POST /api/session/{id}/answer   {version, reply}
    POST /api/session/{id}/undo     {version}
    POST /api/session/{id}/what_if  {reply}

Errors: {error_code, message, span?} with 400 validation, 404 unknown
session, 409 version conflict, 422 domain errors.
"""

from __future__ import annotations

import json
import logging
import sys
import threading
import time
import uuid
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Optional

from .compiler import CompiledTree, analyze
from .engine import AwaitingAnswer, ConsultationSession, Done, evaluate, start
from .errors import (
    IncompleteAssignment,
    InvalidFactValue,
    MissingFact,
    NothingToUndo,
    SessionFinished,
    StateSpaceTooLarge,
    UnknownPredicate,
)
from .jsonio import tree_to_dict
from .model import Document

logger = logging.getLogger("lextree.service")

SESSION_TTL_SECONDS = 24 * 60 * 60


class ApiError(Exception):
    def __init__(self, status: int, error_code: str, message: str):
        self.status = status
        self.error_code = error_code
        self.message = message
        super().__init__(message)


def _status_dict(session: ConsultationSession) -> dict:
    status = session.status
    if isinstance(status, AwaitingAnswer):
        return {
            "state": "awaiting_answer",
            "prompt": status.prompt,
            "predicate": status.literal.predicate,
            "value": status.literal.value,
            "depth": len(session.answered),
        }
    assert isinstance(status, Done)
    return {
        "state": "done",
        "outcome": {"consequence": status.consequence, "text": status.text},
        "trace": status.trace.to_json_dict(),
    }


def _answered_list(session: ConsultationSession) -> list[dict]:
    return [
        {
            "predicate": step.literal.predicate,
            "value": step.literal.value,
            "reply": step.reply,
            "node": step.node,
        }
        for step in session.answered
    ]


@dataclass
class _Entry:
    session: ConsultationSession
    version: int
    last_access: float


class SessionStore:
    """In-memory session registry with versioned updates and idle eviction."""

    def __init__(self, ttl: float = SESSION_TTL_SECONDS,
                 clock: Callable[[], float] = time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: dict[str, _Entry] = {}

    def _evict(self) -> None:
        now = self.clock()
        stale = [sid for sid, e in self._entries.items()
                 if now - e.last_access > self.ttl]
        for sid in stale:
            del self._entries[sid]

    def create(self, session: ConsultationSession) -> tuple[str, int]:
        with self._lock:
            self._evict()
            sid = uuid.uuid4().hex
            self._entries[sid] = _Entry(session=session, version=0,
                                        last_access=self.clock())
            return sid, 0

    def get(self, sid: str) -> tuple[ConsultationSession, int]:
        with self._lock:
            self._evict()
            entry = self._entries.get(sid)
            if entry is None:
                raise ApiError(404, "UnknownSession", f"no session '{sid}'")
            entry.last_access = self.clock()
            return entry.session, entry.version

    def update(self, sid: str, expected_version: int,
               fn: Callable[[ConsultationSession], ConsultationSession]) -> tuple[ConsultationSession, int]:
        with self._lock:
            self._evict()
            entry = self._entries.get(sid)
            if entry is None:
                raise ApiError(404, "UnknownSession", f"no session '{sid}'")
            if entry.version != expected_version:
                raise ApiError(409, "VersionConflict",
                               f"expected version {entry.version}, got {expected_version}")
            entry.session = fn(entry.session)
            entry.version += 1
            entry.last_access = self.clock()
            return entry.session, entry.version


class Api:
    """Transport-free request handling; the HTTP layer stays a thin shim."""

    def __init__(self, doc: Optional[Document], tree: CompiledTree,
                 store: Optional[SessionStore] = None):
        self.doc = doc
        self.tree = tree
        self.store = store or SessionStore()
        self._check_cache: Optional[dict] = None
        self._check_lock = threading.Lock()

    # -- request dispatch ----------------------------------------------------

    def handle(self, method: str, path: str, body: Optional[dict]) -> tuple[int, dict]:
        try:
            return 200, self._route(method, path, body or {})
        except ApiError as exc:
            return exc.status, {
                "format_version": 1,
                "error_code": exc.error_code,
                "message": exc.message,
            }

    def _route(self, method: str, path: str, body: dict) -> dict:
        parts = [p for p in path.split("/") if p]
        if parts == ["api", "tree"] and method == "GET":
            return self.get_tree()
        if parts == ["api", "check"] and method == "POST":
            return self.check()
        if parts == ["api", "eval"] and method == "POST":
            return self.eval(body)
        if parts == ["api", "session"] and method == "POST":
            return self.create_session(body)
        if len(parts) == 3 and parts[:2] == ["api", "session"] and method == "GET":
            return self.get_session(parts[2])
        if len(parts) == 4 and parts[:2] == ["api", "session"] and method == "POST":
            sid, action = parts[2], parts[3]
            if action == "answer":
                return self.answer(sid, body)
            if action == "undo":
                return self.undo(sid, body)
            if action == "what_if":
                return self.what_if(sid, body)
        raise ApiError(404, "NotFound", f"no route for {method} {path}")

    # -- endpoints -------------------------------------------------------------

    def get_tree(self) -> dict:
        stats = self.tree.stats()
        return {
            "format_version": 1,
            "tree": tree_to_dict(self.tree),
            "stats": stats.to_json_dict(),
        }

    def check(self) -> dict:
        if self.doc is None:
            raise ApiError(422, "NoDocument",
                           "server was started from a compiled tree; no document to audit")
        with self._check_lock:
            if self._check_cache is None:
                try:
                    self._check_cache = analyze(self.doc).to_json_dict()
                except StateSpaceTooLarge as exc:
                    raise ApiError(422, "StateSpaceTooLarge", str(exc))
            return self._check_cache

    def eval(self, body: dict) -> dict:
        facts = body.get("facts")
        if not isinstance(facts, dict):
            raise ApiError(400, "BadRequest", "body must carry a 'facts' object")
        try:
            trace = evaluate(self.tree, facts)
        except UnknownPredicate as exc:
            raise ApiError(422, "UnknownPredicate", str(exc))
        except (MissingFact, IncompleteAssignment) as exc:
            raise ApiError(422, "MissingFact", str(exc))
        except InvalidFactValue as exc:
            raise ApiError(422, "InvalidFactValue", str(exc))
        return {"format_version": 1, "trace": trace.to_json_dict()}

    def create_session(self, body: dict) -> dict:
        replay = body.get("replay", [])
        if not isinstance(replay, list):
            raise ApiError(400, "BadRequest", "'replay' must be an array of steps")
        session = start(self.tree)
        for i, raw in enumerate(replay):
            session = self._replay_step(session, raw, i)
        sid, version = self.store.create(session)
        return {
            "format_version": 1,
            "session_id": sid,
            "version": version,
            "status": _status_dict(session),
        }

    def _replay_step(self, session: ConsultationSession, raw: Any,
                     index: int) -> ConsultationSession:
        if not isinstance(raw, dict):
            raise ApiError(400, "BadRequest", f"replay[{index}] must be an object")
        status = session.status
        if not isinstance(status, AwaitingAnswer):
            raise ApiError(422, "ReplayMismatch",
                           f"replay[{index}]: session already finished")
        literal = status.literal
        if raw.get("predicate") != literal.predicate or raw.get("value") != literal.value:
            raise ApiError(422, "ReplayMismatch",
                           f"replay[{index}]: expected question on "
                           f"{literal.predicate}={literal.value!r}")
        reply = raw.get("reply")
        if reply not in ("yes", "no"):
            raise ApiError(400, "BadRequest", f"replay[{index}]: reply must be yes or no")
        return session.answer(reply)

    def get_session(self, sid: str) -> dict:
        session, version = self.store.get(sid)
        return {
            "format_version": 1,
            "version": version,
            "status": _status_dict(session),
            "answered": _answered_list(session),
        }

    def _expected_version(self, body: dict) -> int:
        version = body.get("version")
        if not isinstance(version, int) or isinstance(version, bool):
            raise ApiError(400, "BadRequest", "body must carry an integer 'version'")
        return version

    def answer(self, sid: str, body: dict) -> dict:
        version = self._expected_version(body)
        reply = body.get("reply")
        if reply not in ("yes", "no"):
            raise ApiError(400, "BadRequest", "'reply' must be \"yes\" or \"no\"")

        def step(session: ConsultationSession) -> ConsultationSession:
            try:
                return session.answer(reply)
            except SessionFinished as exc:
                raise ApiError(422, "SessionFinished", str(exc))

        session, new_version = self.store.update(sid, version, step)
        return {"format_version": 1, "version": new_version,
                "status": _status_dict(session)}

    def undo(self, sid: str, body: dict) -> dict:
        version = self._expected_version(body)

        def step(session: ConsultationSession) -> ConsultationSession:
            try:
                return session.undo()
            except NothingToUndo as exc:
                raise ApiError(422, "NothingToUndo", str(exc))

        session, new_version = self.store.update(sid, version, step)
        return {"format_version": 1, "version": new_version,
                "status": _status_dict(session)}

    def what_if(self, sid: str, body: dict) -> dict:
        reply = body.get("reply")
        if reply not in ("yes", "no"):
            raise ApiError(400, "BadRequest", "'reply' must be \"yes\" or \"no\"")
        session, _version = self.store.get(sid)
        try:
            preview = session.what_if(reply)
        except SessionFinished as exc:
            raise ApiError(422, "SessionFinished", str(exc))
        return {"format_version": 1, "preview": preview.to_json_dict()}


def make_handler(api: Api, cors_origin: Optional[str]):
    class Handler(BaseHTTPRequestHandler):
        server_version = "lextree"
        protocol_version = "HTTP/1.1"

        def _respond(self, status: int, payload: dict) -> None:
            body = json.dumps(payload, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            if cors_origin:
                self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.end_headers()
            self.wfile.write(body)

        def _body(self) -> Optional[dict]:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return None
            raw = self.rfile.read(length)
            try:
                decoded = json.loads(raw)
            except json.JSONDecodeError:
                raise ApiError(400, "BadRequest", "request body is not valid JSON")
            if not isinstance(decoded, dict):
                raise ApiError(400, "BadRequest", "request body must be a JSON object")
            declared = decoded.get("format_version", 1)
            if declared != 1:
                raise ApiError(400, "BadVersion",
                               f"unsupported format_version {declared!r}")
            return decoded

        def _handle(self, method: str) -> None:
            try:
                body = self._body()
            except ApiError as exc:
                self._respond(exc.status, {
                    "format_version": 1,
                    "error_code": exc.error_code,
                    "message": exc.message,
                })
                return
            status, payload = api.handle(method, self.path, body)
            self._respond(status, payload)

        def do_GET(self) -> None:
            self._handle("GET")

        def do_POST(self) -> None:
            self._handle("POST")

        def do_OPTIONS(self) -> None:
            self.send_response(204)
            if cors_origin:
                self.send_header("Access-Control-Allow-Origin", cors_origin)
                self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
                self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def log_message(self, fmt: str, *args) -> None:
            logger.info("%s %s", self.address_string(), fmt % args)

    return Handler


def make_server(doc: Optional[Document], tree: CompiledTree, host: str = "127.0.0.1",
                port: int = 0, cors_origin: Optional[str] = None,
                store: Optional[SessionStore] = None) -> ThreadingHTTPServer:
    api = Api(doc, tree, store=store)
    handler = make_handler(api, cors_origin)
    return ThreadingHTTPServer((host, port), handler)


def run_server(doc: Optional[Document], tree: CompiledTree, host: str,
               port: int, cors_origin: Optional[str]) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(asctime)s %(name)s %(message)s")
    server = make_server(doc, tree, host=host, port=port, cors_origin=cors_origin)
    logger.info("serving '%s' on http://%s:%d", tree.source_title, host,
                server.server_port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("interrupted; shutting down")
    finally:
        server.server_close()
    return 0
