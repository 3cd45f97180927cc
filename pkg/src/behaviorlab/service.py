"""JSON-over-HTTP API: the collaboration substrate the workbench UI drives.

A plain WSGI application over the workspace stores. Responses are canonical
JSON (sorted keys, trailing newline), so an identical store snapshot and
request always produce byte-identical bodies; the CLI reuses the same
serializers, which is what makes CLI-vs-API byte equality testable.

Labels are the only mutable resource. Collaboration is poll-based: every
label mutation bumps a per-session revision counter that clients poll, and
expensive analysis responses are cached keyed by (revision, parameters) so
re-labeling invalidates exactly the stale entries.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from socketserver import ThreadingMixIn
from typing import Any, Callable, Iterable, Optional
from urllib.parse import parse_qs, unquote
from wsgiref.simple_server import WSGIServer, make_server

from . import graphs as graphs_mod
from . import irr as irr_mod
from .errors import NotFoundError, ValidationError, WorkbenchError
from .jsonio import canonical_json_bytes
from .labeling import LabelSelection
from .sequence import (BehaviorSequence, build_player_sequence,
                       build_team_sequence, collapse_occurrences)
from .telemetry import EventFilter, session_to_config
from .workspace import SessionHandle, Workspace

STATUS_BY_CODE = {
    "validation": "400 Bad Request",
    "not_found": "404 Not Found",
    "conflict": "409 Conflict",
    "degenerate_input": "422 Unprocessable Entity",
}

REVISION_HEADER = "HTTP_EXPECTED_REVISION"  # Expected-Revision

# The workbench SPA is served as static files from another origin.
_CORS_HEADERS = (
    ("Access-Control-Allow-Origin", "*"),
    ("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"),
    ("Access-Control-Allow-Headers", "Content-Type, Expected-Revision"),
)


@dataclass
class ServiceConfig:
    port: int = 8820
    data_dir: str = "data"
    default_bin_ms: int = 1000
    default_metric: str = "jaccard"

    @staticmethod
    def load(path: Optional[str] = None, env: Optional[dict[str, str]] = None) -> "ServiceConfig":
        """Config file first, then environment overrides."""
        env = os.environ if env is None else env
        cfg = ServiceConfig()
        if path:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            cfg.port = int(doc.get("port", cfg.port))
            cfg.data_dir = str(doc.get("data_dir", cfg.data_dir))
            cfg.default_bin_ms = int(doc.get("default_bin_ms", cfg.default_bin_ms))
            cfg.default_metric = str(doc.get("default_metric", cfg.default_metric))
        if "BEHAVIORLAB_PORT" in env:
            cfg.port = int(env["BEHAVIORLAB_PORT"])
        if "BEHAVIORLAB_DATA_DIR" in env:
            cfg.data_dir = env["BEHAVIORLAB_DATA_DIR"]
        if "BEHAVIORLAB_DEFAULT_BIN_MS" in env:
            cfg.default_bin_ms = int(env["BEHAVIORLAB_DEFAULT_BIN_MS"])
        if "BEHAVIORLAB_DEFAULT_METRIC" in env:
            cfg.default_metric = env["BEHAVIORLAB_DEFAULT_METRIC"]
        return cfg


class _Request:
    def __init__(self, environ: dict[str, Any], params: dict[str, str]):
        self.environ = environ
        self.params = params  # path parameters
        self.query = {k: v[-1] for k, v in
                      parse_qs(environ.get("QUERY_STRING", "")).items()}

    def header(self, wsgi_key: str) -> Optional[str]:
        return self.environ.get(wsgi_key)

    def json_body(self) -> dict[str, Any]:
        try:
            length = int(self.environ.get("CONTENT_LENGTH") or 0)
        except ValueError:
            length = 0
        raw = self.environ["wsgi.input"].read(length) if length else b""
        if not raw:
            raise ValidationError("request body must be a JSON object")
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as err:
            raise ValidationError(f"malformed JSON body: {err}")
        if not isinstance(body, dict):
            raise ValidationError("request body must be a JSON object")
        return body


class WorkbenchApp:
    """WSGI callable exposing the full analysis surface."""

    def __init__(self, workspace: Workspace, config: Optional[ServiceConfig] = None):
        self.workspace = workspace
        self.config = config or ServiceConfig()
        self._routes: list[tuple[str, re.Pattern, Callable]] = []
        self._cache: dict[tuple, bytes] = {}
        self._cache_lock = threading.Lock()
        self._inflight: dict[tuple, threading.Event] = {}
        self._register_routes()

    # -- wsgi ---------------------------------------------------------------

    def __call__(self, environ, start_response) -> Iterable[bytes]:
        method = environ.get("REQUEST_METHOD", "GET")
        path = environ.get("PATH_INFO", "/")
        if method == "OPTIONS":  # CORS preflight for the browser client
            start_response("204 No Content", list(_CORS_HEADERS))
            return [b""]
        try:
            for route_method, pattern, handler in self._routes:
                if route_method != method:
                    continue
                match = pattern.match(path)
                if match:
                    params = {k: unquote(v) for k, v in match.groupdict().items()}
                    status, body = handler(_Request(environ, params))
                    return self._respond(start_response, status, body)
            raise NotFoundError(f"no route for {method} {path}")
        except WorkbenchError as err:
            status = STATUS_BY_CODE[err.code]
            return self._respond(start_response, status,
                                 canonical_json_bytes({"error": err.to_dict()}))

    def _respond(self, start_response, status: str, body: bytes) -> Iterable[bytes]:
        start_response(status, [
            ("Content-Type", "application/json; charset=utf-8"),
            ("Content-Length", str(len(body))),
            *_CORS_HEADERS,
        ])
        return [body]

    # -- routing ------------------------------------------------------------

    def _register_routes(self) -> None:
        def route(method: str, pattern: str, handler: Callable) -> None:
            self._routes.append((method, re.compile("^" + pattern + "$"), handler))

        sid = r"(?P<session_id>[^/]+)"
        lid = r"(?P<label_id>[^/]+)"
        route("GET", r"/sessions", self._list_sessions)
        route("GET", rf"/sessions/{sid}", self._get_session)
        route("GET", rf"/sessions/{sid}/events", self._get_events)
        route("GET", rf"/sessions/{sid}/labels", self._list_labels)
        route("POST", rf"/sessions/{sid}/labels", self._post_label)
        route("PUT", rf"/labels/{lid}", self._put_label)
        route("DELETE", rf"/labels/{lid}", self._delete_label)
        route("GET", rf"/sessions/{sid}/sequences", self._get_sequences)
        route("GET", rf"/sessions/{sid}/graphs/state", self._get_state_graph)
        route("GET", rf"/sessions/{sid}/graphs/sequence", self._get_sequence_graph)
        route("GET", rf"/sessions/{sid}/graphs/group", self._get_group_graph)
        route("GET", rf"/sessions/{sid}/irr", self._get_irr)
        route("GET", rf"/sessions/{sid}/revision", self._get_revision)

    # -- handlers -----------------------------------------------------------

    def _list_sessions(self, req: _Request):
        sessions = []
        for sid in self.workspace.session_ids():
            handle = self.workspace.open(sid)
            sessions.append({
                "session_id": sid,
                "game_title": handle.session.game_title,
                "duration_ms": handle.session.duration_ms,
                "event_count": len(handle.events.events),
            })
        return "200 OK", canonical_json_bytes({"sessions": sessions})

    def _get_session(self, req: _Request):
        handle = self.workspace.open(req.params["session_id"])
        doc = session_to_config(handle.session)
        if handle.labels.vocabulary is not None:
            doc["vocabulary"] = handle.labels.vocabulary.to_doc()
        doc["summary"] = handle.events.summary()
        return "200 OK", canonical_json_bytes(doc)

    def _get_events(self, req: _Request):
        handle = self.workspace.open(req.params["session_id"])
        q = req.query
        window = None
        if "from" in q or "to" in q:
            window = (_int_param(q, "from", 0),
                      _int_param(q, "to", handle.session.duration_ms))
        flt = EventFilter(
            time_window=window,
            unit_ids=_set_param(q, "units"),
            team_ids=_set_param(q, "teams"),
            event_types=_set_param(q, "types"),
        )
        events = [ev.to_record() for ev in handle.events.query(flt)]
        return "200 OK", canonical_json_bytes({"events": events})

    def _list_labels(self, req: _Request):
        handle = self.workspace.open(req.params["session_id"])
        labels = handle.labels.list(author=req.query.get("author"),
                                    name=req.query.get("name"))
        return "200 OK", canonical_json_bytes(
            {"labels": [dict(l.to_doc(), revision=l.revision) for l in labels]})

    def _post_label(self, req: _Request):
        handle = self.workspace.open(req.params["session_id"])
        body = req.json_body()
        for key in ("name", "start_ms", "end_ms", "unit_ids", "author"):
            if key not in body:
                raise ValidationError(f"label body missing {key!r}")
        selection = LabelSelection(
            start_ms=int(body["start_ms"]),
            end_ms=int(body["end_ms"]),
            unit_ids=frozenset(str(u) for u in body["unit_ids"]),
            event_ids=frozenset(str(e) for e in body.get("event_ids", [])),
        )
        label = handle.labels.apply(selection, str(body["name"]), str(body["author"]))
        handle.save_labels()
        return "201 Created", canonical_json_bytes(
            dict(label.to_doc(), revision=label.revision))

    def _resolve_label_session(self, label_id: str) -> SessionHandle:
        for sid in self.workspace.session_ids():
            handle = self.workspace.open(sid)
            try:
                handle.labels.get(label_id)
                return handle
            except NotFoundError:
                continue
        raise NotFoundError(f"unknown label {label_id!r}", label_id=label_id)

    def _put_label(self, req: _Request):
        handle = self._resolve_label_session(req.params["label_id"])
        expected = _expected_revision(req)
        patch = req.json_body()
        label = handle.labels.update(req.params["label_id"], expected, patch)
        handle.save_labels()
        return "200 OK", canonical_json_bytes(
            dict(label.to_doc(), revision=label.revision))

    def _delete_label(self, req: _Request):
        handle = self._resolve_label_session(req.params["label_id"])
        expected = _expected_revision(req)
        handle.labels.delete(req.params["label_id"], expected)
        handle.save_labels()
        return "200 OK", canonical_json_bytes({"deleted": req.params["label_id"]})

    def _get_revision(self, req: _Request):
        handle = self.workspace.open(req.params["session_id"])
        return "200 OK", canonical_json_bytes({"revision": handle.labels.revision})

    # -- analysis (cached) ----------------------------------------------------

    def _get_sequences(self, req: _Request):
        return self._cached(req, "sequences", self.compute_sequences)

    def _get_state_graph(self, req: _Request):
        return self._cached(req, "graphs/state", self.compute_state_graph)

    def _get_sequence_graph(self, req: _Request):
        return self._cached(req, "graphs/sequence",
                            lambda h, q: self.compute_scatter(h, q, "player"))

    def _get_group_graph(self, req: _Request):
        return self._cached(req, "graphs/group",
                            lambda h, q: self.compute_scatter(h, q, "team"))

    def _get_irr(self, req: _Request):
        return self._cached(req, "irr", self.compute_irr)

    def _cached(self, req: _Request, endpoint: str, compute: Callable):
        handle = self.workspace.open(req.params["session_id"])
        key = (endpoint, handle.session.id, handle.labels.revision,
               tuple(sorted(req.query.items())))
        with self._cache_lock:
            if key in self._cache:
                return "200 OK", self._cache[key]
            waiter = self._inflight.get(key)
            if waiter is None:
                self._inflight[key] = threading.Event()
        if waiter is not None:
            waiter.wait()
            with self._cache_lock:
                if key in self._cache:
                    return "200 OK", self._cache[key]
            # the first flight failed; fall through and compute ourselves
        try:
            body = canonical_json_bytes(compute(handle, req.query))
            # only cache if no mutation landed mid-computation, else the
            # body would be filed under a stale revision key
            if handle.labels.revision == key[2]:
                with self._cache_lock:
                    self._cache[key] = body
            return "200 OK", body
        finally:
            with self._cache_lock:
                event = self._inflight.pop(key, None)
            if event is not None:
                event.set()

    def _build_sequences(self, handle: SessionHandle, rater: str, scope: str):
        labels = handle.labels.list(author=rater)
        session = handle.session
        if scope == "player":
            return [build_player_sequence(labels, u.id, session.roster,
                                          rater=rater, session_id=session.id)
                    for u in session.players()]
        if scope == "team":
            return [build_team_sequence(labels, t, session.roster,
                                        rater=rater, session_id=session.id)
                    for t in session.teams()]
        raise ValidationError(f"unknown scope {scope!r}", scope=scope)

    def compute_sequences(self, handle: SessionHandle, q: dict[str, str]):
        rater = _require(q, "rater")
        scope = q.get("scope", "player")
        sequences = self._build_sequences(handle, rater, scope)
        if "round" in q:
            round_index = _int_value(q["round"], "round")
            marks = handle.session.round_marks
            if not marks:
                raise ValidationError("session has no round marks")
            if round_index not in {i for i, _ in marks}:
                raise NotFoundError(f"unknown round {round_index}", round=round_index)
            sequences = _restrict_to_round(sequences, marks, round_index)
        return {"scope": scope, "rater": rater,
                "sequences": [s.to_doc() for s in sequences]}

    def compute_state_graph(self, handle: SessionHandle, q: dict[str, str]):
        rater = _require(q, "rater")
        scope = q.get("scope", "player")
        sequences = self._build_sequences(handle, rater, scope)
        if "round" in q:
            round_index = _int_value(q["round"], "round")
            marks = handle.session.round_marks
            if not marks:
                raise ValidationError("session has no round marks")
            per_round = graphs_mod.round_scoped_graphs(sequences, marks)
            if round_index not in per_round:
                raise NotFoundError(f"unknown round {round_index}", round=round_index)
            graph = per_round[round_index]
        else:
            graph = graphs_mod.build_state_graph(sequences)
        return graphs_mod.state_graph_to_doc(graph)

    def compute_scatter(self, handle: SessionHandle, q: dict[str, str], scope: str):
        rater = _require(q, "rater")
        metric = q.get("metric", self.config.default_metric)
        if metric not in ("jaccard", "discrete"):
            raise ValidationError(f"unknown metric {metric!r}", metric=metric)
        k = _int_value(q.get("k", "2"), "k")
        seed = _int_value(q.get("seed", "0"), "seed")
        mode = q.get("mode", "collapsed")
        sequences = self._build_sequences(handle, rater, scope)
        build = (graphs_mod.build_sequence_graph if scope == "player"
                 else graphs_mod.build_group_graph)
        model = build(sequences, metric=metric, k=k, seed=seed, mode=mode)
        return model.to_doc()

    def compute_irr(self, handle: SessionHandle, q: dict[str, str]):
        rater_a = _require(q, "raterA")
        rater_b = _require(q, "raterB")
        bin_ms = _int_value(q.get("bin_ms", str(self.config.default_bin_ms)), "bin_ms")
        session = handle.session
        a = irr_mod.discretize(handle.labels.list(author=rater_a), session,
                               bin_ms=bin_ms, rater=rater_a)
        b = irr_mod.discretize(handle.labels.list(author=rater_b), session,
                               bin_ms=bin_ms, rater=rater_b)
        report = irr_mod.cohen_kappa(a, b)
        return dict(report.to_doc(), raterA=rater_a, raterB=rater_b)


def _restrict_to_round(sequences, marks, round_index: int):
    out = []
    for seq in sequences:
        occs = [o for o in seq.occurrences
                if graphs_mod.round_containing(marks, o.start_ms) == round_index]
        out.append(BehaviorSequence(owner=seq.owner, session_id=seq.session_id,
                                    rater=seq.rater,
                                    elements=collapse_occurrences(occs),
                                    occurrences=occs))
    return out


def _require(q: dict[str, str], key: str) -> str:
    value = q.get(key)
    if not value:
        raise ValidationError(f"missing required query parameter {key!r}", parameter=key)
    return value


def _int_param(q: dict[str, str], key: str, default: int) -> int:
    return _int_value(q[key], key) if key in q else default


def _int_value(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"parameter {key!r} must be an integer", value=text)


def _set_param(q: dict[str, str], key: str) -> Optional[frozenset[str]]:
    if key not in q or q[key] == "":
        return None
    return frozenset(q[key].split(","))


def _expected_revision(req: _Request) -> int:
    raw = req.header(REVISION_HEADER)
    if raw is None:
        raise ValidationError("Expected-Revision header is required")
    try:
        return int(raw)
    except ValueError:
        raise ValidationError("Expected-Revision header must be an integer", value=raw)


class _ThreadingWSGIServer(ThreadingMixIn, WSGIServer):
    daemon_threads = True


def serve(workspace: Workspace, config: ServiceConfig, host: str = "127.0.0.1"):
    """Run the API server (blocking). Returns the server for tests that
    start it on a background thread."""
    app = WorkbenchApp(workspace, config)
    server = make_server(host, config.port, app, server_class=_ThreadingWSGIServer)
    return server
