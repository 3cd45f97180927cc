from __future__ import annotations

import io
import json
from typing import Any, Optional

import pytest

from behaviorlab.labeling import Label, LabelStore, LabelVocabulary, VocabularyEntry
from behaviorlab.telemetry import Session, SessionStore, Unit


def make_session(session_id: str = "s1", duration_ms: int = 100_000,
                 round_marks: Optional[list[tuple[int, int]]] = None,
                 roster: Optional[list[Unit]] = None) -> Session:
    if roster is None:
        roster = [
            Unit("p1", "Player 1", team_id="T"),
            Unit("p2", "Player 2", team_id="T"),
            Unit("p3", "Player 3", team_id="U"),
            Unit("p4", "Player 4", team_id="U"),
            Unit("npc1", "Creep", team_id=None, is_player=False),
        ]
    return Session(
        id=session_id,
        game_title="testgame",
        duration_ms=duration_ms,
        map_bounds=(0.0, 0.0, 100.0, 100.0),
        roster={u.id: u for u in roster},
        round_marks=round_marks or [],
    )


def make_store(session: Optional[Session] = None, events: Optional[list[dict]] = None) -> SessionStore:
    store = SessionStore(session or make_session())
    if events:
        store.ingest(events)
    return store


def event_record(event_id: str, t: int, unit: str = "p1", etype: str = "move",
                 session_id: str = "s1", **extra: Any) -> dict:
    rec = {"session_id": session_id, "event_id": event_id, "timestamp_ms": t,
           "unit_id": unit, "event_type": etype}
    rec.update(extra)
    return rec


def mk_label(name: str, start: int, end: int, units, label_id: str = "",
             author: str = "A", session_id: str = "s1", events=(),
             revision: int = 1) -> Label:
    return Label(
        label_id=label_id or f"{name}-{start}-{end}",
        session_id=session_id,
        name=name,
        start_ms=start,
        end_ms=end,
        unit_ids=frozenset(units),
        event_ids=frozenset(events),
        author=author,
        revision=revision,
        created_at=0,
    )


@pytest.fixture
def session() -> Session:
    return make_session()


@pytest.fixture
def store(session) -> SessionStore:
    return SessionStore(session)


@pytest.fixture
def label_store(store) -> LabelStore:
    return LabelStore(store)


def moba_vocabulary() -> LabelVocabulary:
    names = ["Push", "Farm", "Kill", "Group Fight", "Team Fight", "Roam",
             "Gank", "Roshan", "Split Push"]
    return LabelVocabulary(game_title="moba",
                           entries=[VocabularyEntry(n) for n in names])


def brute_force_sequence(labels, owner_id: str, duration: int) -> list[tuple[str, int]]:
    """Independent sweep-line oracle: per-millisecond active-set scan over
    [0, duration), runs of constant non-empty sets become occurrences, then
    run-length collapse. Returns (canonical_name, repeat_count) pairs."""
    mine = [l for l in labels if owner_id in l.unit_ids]
    occurrences = []
    prev = None
    for t in range(duration):
        active = frozenset(l.name for l in mine if l.start_ms <= t < l.end_ms)
        if active and active != prev:
            occurrences.append(active)
        prev = active if active else None
    collapsed: list[tuple[frozenset, int]] = []
    for occ in occurrences:
        if collapsed and collapsed[-1][0] == occ:
            collapsed[-1] = (occ, collapsed[-1][1] + 1)
        else:
            collapsed.append((occ, 1))
    return [(" - ".join(sorted(s)), c) for s, c in collapsed]


def wsgi_call(app, method: str, path: str, query: str = "",
              body: Optional[dict] = None, headers: Optional[dict[str, str]] = None):
    """Drive a WSGI app without a socket; returns (status_code, body_bytes)."""
    raw = json.dumps(body).encode() if body is not None else b""
    environ = {
        "REQUEST_METHOD": method,
        "PATH_INFO": path,
        "QUERY_STRING": query,
        "CONTENT_LENGTH": str(len(raw)),
        "wsgi.input": io.BytesIO(raw),
    }
    for name, value in (headers or {}).items():
        environ["HTTP_" + name.upper().replace("-", "_")] = value
    captured: dict[str, str] = {}

    def start_response(status, response_headers):
        captured["status"] = status

    chunks = app(environ, start_response)
    return int(captured["status"].split()[0]), b"".join(chunks)


def wsgi_json(app, method: str, path: str, query: str = "",
              body: Optional[dict] = None, headers: Optional[dict[str, str]] = None):
    status, raw = wsgi_call(app, method, path, query=query, body=body, headers=headers)
    return status, json.loads(raw)
