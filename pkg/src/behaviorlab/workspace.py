"""File-backed workspace: one directory per session.

Layout:

    <root>/sessions/<session_id>/
        session.json    session config (and optional vocabulary)
        events.jsonl    accepted events, one record per line, time-sorted
        labels.json     label store state (labels, revisions, tombstones, log)

Telemetry is written once at ingest and treated as immutable; the label file
is rewritten atomically after every mutation.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import NotFoundError, ValidationError
from .jsonio import canonical_json
from .labeling import LabelStore, LabelVocabulary
from .telemetry import IngestReport, SessionStore, parse_session_config, session_to_config


class SessionHandle:
    """A session's stores plus their on-disk home."""

    def __init__(self, directory: Path, events: SessionStore, labels: LabelStore):
        self.directory = directory
        self.events = events
        self.labels = labels

    @property
    def session(self):
        return self.events.session

    def save_labels(self) -> None:
        _atomic_write(self.directory / "labels.json",
                      canonical_json(self.labels.state_doc()))


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._handles: dict[str, SessionHandle] = {}
        self._lock = threading.Lock()

    def _sessions_dir(self) -> Path:
        return self.root / "sessions"

    def session_ids(self) -> list[str]:
        base = self._sessions_dir()
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "session.json").is_file())

    def create_session(self, config_doc: dict[str, Any],
                       records: Iterable[dict[str, Any]] = ()) -> tuple[SessionHandle, IngestReport]:
        """Create the session directory, ingest events, persist everything."""
        session = parse_session_config(config_doc)
        directory = self._sessions_dir() / session.id
        if directory.exists():
            raise ValidationError(f"session {session.id!r} already exists",
                                  session_id=session.id)
        store = SessionStore(session,
                             auto_register_units=bool(config_doc.get("auto_register_units", True)))
        report = store.ingest(records)
        vocabulary = None
        if config_doc.get("vocabulary"):
            vocabulary = LabelVocabulary.from_doc(config_doc["vocabulary"])
        labels = LabelStore(store, vocabulary=vocabulary)

        directory.mkdir(parents=True)
        config_out = session_to_config(session)
        if vocabulary is not None:
            config_out["vocabulary"] = vocabulary.to_doc()
        if not store.auto_register_units:
            config_out["auto_register_units"] = False
        _atomic_write(directory / "session.json", canonical_json(config_out))
        with open(directory / "events.jsonl", "w", encoding="utf-8") as fh:
            for record in store.iter_records():
                fh.write(canonical_json(record))
        handle = SessionHandle(directory, store, labels)
        handle.save_labels()
        with self._lock:
            self._handles[session.id] = handle
        return handle, report

    def open(self, session_id: str) -> SessionHandle:
        with self._lock:
            if session_id in self._handles:
                return self._handles[session_id]
        directory = self._sessions_dir() / session_id
        if not (directory / "session.json").is_file():
            raise NotFoundError(f"unknown session {session_id!r}", session_id=session_id)
        config_doc = json.loads((directory / "session.json").read_text(encoding="utf-8"))
        session = parse_session_config(config_doc)
        store = SessionStore(session,
                             auto_register_units=bool(config_doc.get("auto_register_units", True)))
        events_path = directory / "events.jsonl"
        if events_path.is_file():
            report = store.ingest(read_jsonl(events_path))
            if report.rejected:
                raise ValidationError(
                    f"stored events for {session_id!r} failed to reload cleanly",
                    session_id=session_id, errors=dict(report.errors))
        vocabulary = None
        if config_doc.get("vocabulary"):
            vocabulary = LabelVocabulary.from_doc(config_doc["vocabulary"])
        labels = LabelStore(store, vocabulary=vocabulary)
        labels_path = directory / "labels.json"
        if labels_path.is_file():
            labels.load_state(json.loads(labels_path.read_text(encoding="utf-8")))
        handle = SessionHandle(directory, store, labels)
        with self._lock:
            return self._handles.setdefault(session_id, handle)

    def audit(self) -> dict[str, list[str]]:
        """Run every store audit; returns problems per session (empty = clean)."""
        problems: dict[str, list[str]] = {}
        for sid in self.session_ids():
            handle = self.open(sid)
            found = handle.events.audit() + handle.labels.audit()
            if found:
                problems[sid] = found
        return problems


def read_jsonl(path: Path) -> Iterator[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError:
                yield line  # non-dict record, tallied as bad_record by ingest


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
