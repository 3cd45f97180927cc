"""Human-applied behavior labels: vocabulary, store, concurrency, export.

A label names a behavior over (time window x unit set x event set) and is
authored by one rater. Raters' label sets coexist in one store and are
distinguished by the ``author`` field; analysis picks one author's set.

Writes are serialized per store with optimistic concurrency: every mutation
must present the revision it expects, and the first writer wins. Deletions
tombstone the id so it is never reused, and every mutation lands in an audit
log (the label->visualize->revise loop benefits from recoverable history).
"""

from __future__ import annotations

import threading
import time
from collections import Counter
from dataclasses import dataclass, replace
from typing import Any, Optional

from .errors import ConflictError, NotFoundError, ValidationError
from .telemetry import EventFilter, IngestReport, SessionStore, Unit

EXPORT_FIELDS = ("label_id", "session_id", "name", "start_ms", "end_ms",
                 "unit_ids", "event_ids", "author", "created_at")


@dataclass(frozen=True)
class VocabularyEntry:
    name: str
    description: str = ""


@dataclass
class LabelVocabulary:
    game_title: str
    entries: list[VocabularyEntry]

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if any(not n for n in names):
            raise ValidationError("vocabulary names must be non-empty")
        if len(set(names)) != len(names):
            raise ValidationError("vocabulary names must be unique")

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def __contains__(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)

    @staticmethod
    def from_doc(doc: dict[str, Any]) -> "LabelVocabulary":
        return LabelVocabulary(
            game_title=str(doc.get("game_title", "")),
            entries=[VocabularyEntry(str(e["name"]), str(e.get("description", "")))
                     for e in doc.get("entries", [])],
        )

    def to_doc(self) -> dict[str, Any]:
        return {
            "game_title": self.game_title,
            "entries": [{"name": e.name, "description": e.description}
                        for e in self.entries],
        }


@dataclass(frozen=True)
class Label:
    label_id: str
    session_id: str
    name: str
    start_ms: int
    end_ms: int
    unit_ids: frozenset[str]
    event_ids: frozenset[str]
    author: str
    revision: int = 1
    created_at: int = 0  # epoch milliseconds

    def sort_key(self) -> tuple[int, int, str]:
        return (self.start_ms, self.end_ms, self.label_id)

    def to_doc(self) -> dict[str, Any]:
        return {
            "label_id": self.label_id,
            "session_id": self.session_id,
            "name": self.name,
            "start_ms": self.start_ms,
            "end_ms": self.end_ms,
            "unit_ids": sorted(self.unit_ids),
            "event_ids": sorted(self.event_ids),
            "author": self.author,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class LabelSelection:
    """The staged (window x units x events) selection before it is named."""

    start_ms: int
    end_ms: int
    unit_ids: frozenset[str]
    event_ids: frozenset[str] = frozenset()


def stage_selection(session_store: SessionStore, start_ms: int, end_ms: int,
                    unit_ids=None, event_types=None,
                    include_npc: bool = False) -> LabelSelection:
    """Brush-style staging: everything in the window for the chosen units.

    NPC units are left out unless ``include_npc`` is set or they are named
    explicitly in ``unit_ids`` (telemetry keeps NPC events, but labels attach
    to players by default).
    """
    roster = session_store.session.roster
    if unit_ids is not None:
        chosen = {str(u) for u in unit_ids}
    else:
        chosen = {u.id for u in roster.values()
                  if u.is_player or include_npc}
    flt = EventFilter(time_window=(start_ms, end_ms),
                      unit_ids=frozenset(chosen),
                      event_types=None if event_types is None else frozenset(event_types))
    events = session_store.query(flt)
    return LabelSelection(
        start_ms=start_ms,
        end_ms=end_ms,
        unit_ids=frozenset(chosen),
        event_ids=frozenset(ev.event_id for ev in events),
    )


def is_team_label(label: Label | LabelSelection, roster: dict[str, Unit]) -> bool:
    """True iff at least two player units in the label share a team."""
    teams: Counter = Counter()
    for uid in label.unit_ids:
        unit = roster.get(uid)
        if unit is None:
            raise ValidationError(f"label references unknown unit {uid!r}", unit_id=uid)
        if unit.is_player and unit.team_id is not None:
            teams[unit.team_id] += 1
    return any(count >= 2 for count in teams.values())


def team_of_label(label: Label, roster: dict[str, Unit]) -> Optional[str]:
    """Team a team label belongs to: the strict majority team among its
    player units. Exact ties are an operator error, not a silent choice."""
    if not is_team_label(label, roster):
        return None
    teams: Counter = Counter()
    for uid in label.unit_ids:
        unit = roster[uid]
        if unit.is_player and unit.team_id is not None:
            teams[unit.team_id] += 1
    ranked = teams.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        raise ValidationError(
            f"label {label.label_id!r} spans teams with tied player counts",
            label_id=label.label_id, counts=dict(teams))
    return ranked[0][0]


class LabelStore:
    """Authoritative label store for one session.

    Thread-safe: reads take a snapshot, writes are serialized and bump the
    store revision (the counter the UI polls to refresh).
    """

    def __init__(self, session_store: SessionStore,
                 vocabulary: Optional[LabelVocabulary] = None):
        self._session_store = session_store
        self.vocabulary = vocabulary
        self._labels: dict[str, Label] = {}
        self._tombstones: set[str] = set()
        self._audit_log: list[dict[str, Any]] = []
        self._revision = 0
        self._next_label_number = 1
        self._lock = threading.Lock()

    @property
    def session(self):
        return self._session_store.session

    @property
    def revision(self) -> int:
        with self._lock:
            return self._revision

    @property
    def audit_log(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self._audit_log)

    # -- validation ---------------------------------------------------------

    def _validate(self, label: Label) -> None:
        session = self.session
        if not label.unit_ids:
            raise ValidationError("label must cover at least one unit")
        if not (label.start_ms < label.end_ms):
            raise ValidationError("label start_ms must be < end_ms",
                                  start_ms=label.start_ms, end_ms=label.end_ms)
        if label.start_ms < 0 or label.end_ms > session.duration_ms:
            raise ValidationError("label window outside session duration",
                                  start_ms=label.start_ms, end_ms=label.end_ms,
                                  duration_ms=session.duration_ms)
        if not label.name:
            raise ValidationError("label name must be non-empty")
        if self.vocabulary is not None and label.name not in self.vocabulary:
            raise ValidationError(f"label name {label.name!r} not in vocabulary",
                                  name=label.name, vocabulary=self.vocabulary.names())
        for uid in label.unit_ids:
            if uid not in session.roster:
                raise ValidationError(f"label references unknown unit {uid!r}", unit_id=uid)
        for eid in label.event_ids:
            event = self._session_store.get_event(eid)
            if not (label.start_ms <= event.timestamp_ms <= label.end_ms):
                raise ValidationError(
                    f"event {eid!r} lies outside the label window",
                    event_id=eid, timestamp_ms=event.timestamp_ms)
            if event.unit_id not in label.unit_ids:
                raise ValidationError(
                    f"event {eid!r} belongs to a unit outside the label's unit set",
                    event_id=eid, unit_id=event.unit_id)

    # -- mutations ----------------------------------------------------------

    def apply(self, selection: LabelSelection, name: str, author: str,
              created_at: Optional[int] = None) -> Label:
        """Persist the staged selection under ``name``; visible to all
        readers as soon as this returns."""
        with self._lock:
            label = Label(
                label_id=self._next_id(),
                session_id=self.session.id,
                name=name,
                start_ms=selection.start_ms,
                end_ms=selection.end_ms,
                unit_ids=frozenset(selection.unit_ids),
                event_ids=frozenset(selection.event_ids),
                author=author,
                revision=1,
                created_at=self._now(created_at),
            )
            self._validate(label)
            self._labels[label.label_id] = label
            self._commit("apply", label)
            return label

    def update(self, label_id: str, expected_revision: int,
               patch: dict[str, Any]) -> Label:
        with self._lock:
            current = self._get_locked(label_id)
            if current.revision != expected_revision:
                raise ConflictError(
                    f"label {label_id!r} is at revision {current.revision}, "
                    f"expected {expected_revision}",
                    label_id=label_id, revision=current.revision,
                    expected_revision=expected_revision)
            allowed = {"name", "start_ms", "end_ms", "unit_ids", "event_ids"}
            unknown = set(patch) - allowed
            if unknown:
                raise ValidationError(f"unknown patch fields {sorted(unknown)}")
            fields: dict[str, Any] = dict(patch)
            for key in ("unit_ids", "event_ids"):
                if key in fields:
                    fields[key] = frozenset(str(v) for v in fields[key])
            for key in ("start_ms", "end_ms"):
                if key in fields:
                    fields[key] = int(fields[key])
            updated = replace(current, revision=current.revision + 1, **fields)
            self._validate(updated)
            self._labels[label_id] = updated
            self._commit("update", updated)
            return updated

    def delete(self, label_id: str, expected_revision: int) -> None:
        with self._lock:
            current = self._get_locked(label_id)
            if current.revision != expected_revision:
                raise ConflictError(
                    f"label {label_id!r} is at revision {current.revision}, "
                    f"expected {expected_revision}",
                    label_id=label_id, revision=current.revision,
                    expected_revision=expected_revision)
            del self._labels[label_id]
            self._tombstones.add(label_id)
            self._commit("delete", current)

    # -- reads --------------------------------------------------------------

    def get(self, label_id: str) -> Label:
        with self._lock:
            return self._get_locked(label_id)

    def list(self, author: Optional[str] = None,
             name: Optional[str] = None) -> list[Label]:
        with self._lock:
            labels = list(self._labels.values())
        if author is not None:
            labels = [l for l in labels if l.author == author]
        if name is not None:
            labels = [l for l in labels if l.name == name]
        return sorted(labels, key=Label.sort_key)

    def authors(self) -> list[str]:
        with self._lock:
            return sorted({l.author for l in self._labels.values()})

    def audit(self) -> list[str]:
        """Verify every stored label still satisfies its invariants."""
        problems = []
        for label in self.list():
            try:
                self._validate(label)
            except ValidationError as err:
                problems.append(f"label {label.label_id}: {err.message}")
            if label.label_id in self._tombstones:
                problems.append(f"label {label.label_id} is both live and tombstoned")
        return problems

    # -- export / import ----------------------------------------------------

    def export_doc(self, author: Optional[str] = None) -> dict[str, Any]:
        return {
            "session_id": self.session.id,
            "labels": [l.to_doc() for l in self.list(author=author)],
        }

    def import_doc(self, doc: dict[str, Any]) -> IngestReport:
        """Import labels from an export document. Ids are preserved and
        revisions reset to 1; invalid records are tallied, import continues."""
        report = IngestReport()
        records = doc.get("labels")
        if not isinstance(records, list):
            raise ValidationError("label document must contain a 'labels' array")
        for record in records:
            try:
                label = self._label_from_doc(record)
                with self._lock:
                    if label.label_id in self._labels or label.label_id in self._tombstones:
                        raise ValidationError(f"duplicate label id {label.label_id!r}")
                    self._validate(label)
                    self._labels[label.label_id] = label
                    self._commit("import", label)
                report.accepted += 1
            except (ValidationError, NotFoundError, KeyError, TypeError, ValueError) as err:
                report.rejected += 1
                report.errors[_import_error_key(err)] += 1
        return report

    def _label_from_doc(self, record: dict[str, Any]) -> Label:
        return Label(
            label_id=str(record["label_id"]),
            session_id=str(record.get("session_id", self.session.id)),
            name=str(record["name"]),
            start_ms=int(record["start_ms"]),
            end_ms=int(record["end_ms"]),
            unit_ids=frozenset(str(u) for u in record["unit_ids"]),
            event_ids=frozenset(str(e) for e in record.get("event_ids", [])),
            author=str(record["author"]),
            revision=1,
            created_at=int(record.get("created_at", 0)),
        )

    # -- persistence hooks ---------------------------------------------------

    def state_doc(self) -> dict[str, Any]:
        """Full store state (labels, revisions, tombstones) for persistence."""
        with self._lock:
            return {
                "session_id": self.session.id,
                "revision": self._revision,
                "next_label_number": self._next_label_number,
                "tombstones": sorted(self._tombstones),
                "labels": [dict(l.to_doc(), revision=l.revision)
                           for l in sorted(self._labels.values(), key=Label.sort_key)],
                "audit_log": list(self._audit_log),
            }

    def load_state(self, doc: dict[str, Any]) -> None:
        with self._lock:
            self._labels = {}
            for record in doc.get("labels", []):
                label = self._label_from_doc(record)
                label = replace(label, revision=int(record.get("revision", 1)))
                self._labels[label.label_id] = label
            self._tombstones = set(doc.get("tombstones", []))
            self._audit_log = list(doc.get("audit_log", []))
            self._revision = int(doc.get("revision", 0))
            self._next_label_number = int(doc.get("next_label_number", 1))

    # -- internals ----------------------------------------------------------

    def _next_id(self) -> str:
        # Session-scoped prefix keeps generated ids unique across a data dir,
        # so /labels/{id} routes need no session in the path.
        label_id = f"{self.session.id}:L{self._next_label_number:06d}"
        self._next_label_number += 1
        return label_id

    def _now(self, created_at: Optional[int]) -> int:
        return int(time.time() * 1000) if created_at is None else int(created_at)

    def _get_locked(self, label_id: str) -> Label:
        label = self._labels.get(label_id)
        if label is None:
            raise NotFoundError(f"unknown label {label_id!r}", label_id=label_id)
        return label

    def _commit(self, op: str, label: Label) -> None:
        self._revision += 1
        self._audit_log.append({
            "op": op,
            "label_id": label.label_id,
            "revision": label.revision,
            "author": label.author,
            "store_revision": self._revision,
        })


def _import_error_key(err: Exception) -> str:
    if isinstance(err, (KeyError, TypeError)):
        return "missing_field"
    if isinstance(err, ValueError) and not isinstance(err, ValidationError):
        return "bad_number"
    return "invalid_label"
