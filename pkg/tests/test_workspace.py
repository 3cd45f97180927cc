from __future__ import annotations

import json

import pytest

from behaviorlab.errors import NotFoundError, ValidationError
from behaviorlab.labeling import LabelSelection
from behaviorlab.workspace import Workspace

from conftest import event_record


CONFIG = {
    "session_id": "w1",
    "game_title": "testgame",
    "duration_ms": 10_000,
    "map_bounds": [0, 0, 100, 100],
    "roster": [{"id": "p1", "team_id": "T"}, {"id": "p2", "team_id": "T"}],
    "vocabulary": {"game_title": "testgame",
                   "entries": [{"name": "Farm"}, {"name": "Push"}]},
}


def test_create_open_cycle(tmp_path):
    ws = Workspace(tmp_path)
    handle, report = ws.create_session(
        CONFIG, [event_record("e1", 100, session_id="w1")])
    assert report.accepted == 1
    assert ws.session_ids() == ["w1"]

    handle.labels.apply(LabelSelection(0, 1000, frozenset({"p1"})), "Farm", "A")
    handle.save_labels()

    fresh = Workspace(tmp_path)
    reopened = fresh.open("w1")
    assert len(reopened.events.events) == 1
    labels = reopened.labels.list()
    assert len(labels) == 1 and labels[0].revision == 1
    assert reopened.labels.revision == 1
    # vocabulary survives the round trip and is still enforced
    with pytest.raises(ValidationError):
        reopened.labels.apply(LabelSelection(0, 1000, frozenset({"p1"})),
                              "Jungle", "A")
    # id counter continues rather than reusing ids
    second = reopened.labels.apply(LabelSelection(0, 1000, frozenset({"p1"})),
                                   "Push", "A")
    assert second.label_id != labels[0].label_id


def test_duplicate_session_rejected(tmp_path):
    ws = Workspace(tmp_path)
    ws.create_session(CONFIG, [])
    with pytest.raises(ValidationError):
        ws.create_session(CONFIG, [])


def test_open_unknown_session(tmp_path):
    with pytest.raises(NotFoundError):
        Workspace(tmp_path).open("ghost")


def test_audit_covers_all_sessions(tmp_path):
    ws = Workspace(tmp_path)
    ws.create_session(CONFIG, [event_record("e1", 100, session_id="w1")])
    assert ws.audit() == {}


def test_malformed_event_lines_are_tallied_on_ingest(tmp_path):
    events_file = tmp_path / "events.jsonl"
    events_file.write_text(
        json.dumps(event_record("e1", 100, session_id="w1")) + "\n"
        + "{broken json\n")
    from behaviorlab.workspace import read_jsonl
    ws = Workspace(tmp_path / "data")
    handle, report = ws.create_session(CONFIG, read_jsonl(events_file))
    assert report.accepted == 1
    assert report.errors == {"bad_record": 1}
