"""Game-agnostic telemetry model: sessions, units, events, ingest, filtering.

Events are ingested once per session (single writer), stored sorted by
``(timestamp_ms, event_id)`` and never mutated afterwards, so queries are
deterministic and freely concurrent.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Optional, Sequence

from .errors import NotFoundError, ValidationError

# Exact wire names of an event record. Any key starting with "payload."
# carries one payload attribute; unknown other keys are ignored.
REQUIRED_EVENT_FIELDS = ("event_id", "timestamp_ms", "unit_id", "event_type")


@dataclass(frozen=True)
class Unit:
    id: str
    display_name: str = ""
    team_id: Optional[str] = None
    is_player: bool = True


@dataclass(frozen=True)
class TelemetryEvent:
    event_id: str
    session_id: str
    timestamp_ms: int
    unit_id: str
    event_type: str
    position: Optional[tuple[float, float]] = None
    payload: dict[str, str] = field(default_factory=dict)

    def sort_key(self) -> tuple[int, str]:
        return (self.timestamp_ms, self.event_id)

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "session_id": self.session_id,
            "event_id": self.event_id,
            "timestamp_ms": self.timestamp_ms,
            "unit_id": self.unit_id,
            "event_type": self.event_type,
        }
        if self.position is not None:
            rec["x"], rec["y"] = self.position
        for key in sorted(self.payload):
            rec["payload." + key] = self.payload[key]
        return rec


@dataclass
class Session:
    """Static description of one recorded play session."""

    id: str
    game_title: str
    duration_ms: int
    map_bounds: tuple[float, float, float, float]  # (min_x, min_y, max_x, max_y)
    roster: dict[str, Unit] = field(default_factory=dict)
    round_marks: list[tuple[int, int]] = field(default_factory=list)  # (round_index, start_ms)

    def __post_init__(self):
        min_x, min_y, max_x, max_y = self.map_bounds
        if not (min_x < max_x and min_y < max_y):
            raise ValidationError("map_bounds must satisfy min_x < max_x and min_y < max_y",
                                  map_bounds=list(self.map_bounds))
        if self.duration_ms < 0:
            raise ValidationError("duration_ms must be non-negative")
        starts = [s for _, s in self.round_marks]
        indices = [i for i, _ in self.round_marks]
        if starts != sorted(set(starts)):
            raise ValidationError("round_marks must be strictly increasing in start_ms")
        if indices != list(range(1, len(indices) + 1)):
            raise ValidationError("round_marks indices must be contiguous from 1")

    def round_of(self, timestamp_ms: int) -> Optional[int]:
        """Round containing ``timestamp_ms``. Instants before the first mark
        fold into the first round; ``None`` when the session has no rounds."""
        if not self.round_marks:
            return None
        starts = [s for _, s in self.round_marks]
        pos = bisect_right(starts, timestamp_ms) - 1
        if pos < 0:
            pos = 0
        return self.round_marks[pos][0]

    def team_of(self, unit_id: str) -> Optional[str]:
        unit = self.roster.get(unit_id)
        return unit.team_id if unit else None

    def players(self) -> list[Unit]:
        return [u for u in self.roster.values() if u.is_player]

    def teams(self) -> list[str]:
        seen: dict[str, None] = {}
        for u in self.roster.values():
            if u.is_player and u.team_id is not None:
                seen.setdefault(u.team_id)
        return list(seen)


@dataclass(frozen=True)
class EventFilter:
    time_window: Optional[tuple[int, int]] = None  # closed interval [from_ms, to_ms]
    unit_ids: Optional[frozenset[str]] = None
    team_ids: Optional[frozenset[str]] = None
    event_types: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.time_window is not None:
            lo, hi = self.time_window
            if lo > hi:
                raise ValidationError("time_window from_ms must be <= to_ms",
                                      from_ms=lo, to_ms=hi)


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    errors: Counter = field(default_factory=Counter)
    clamped_positions: int = 0
    auto_registered_units: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "errors": {k: self.errors[k] for k in sorted(self.errors)},
            "clamped_positions": self.clamped_positions,
            "auto_registered_units": sorted(self.auto_registered_units),
        }


def parse_session_config(doc: dict[str, Any]) -> Session:
    """Build a Session from its config document.

    Expected keys: session_id, game_title, duration_ms, map_bounds,
    roster[], round_marks[] (roster and round_marks optional).
    """
    for key in ("session_id", "game_title", "duration_ms", "map_bounds"):
        if key not in doc:
            raise ValidationError(f"session config missing {key!r}")
    bounds = doc["map_bounds"]
    if not (isinstance(bounds, (list, tuple)) and len(bounds) == 4):
        raise ValidationError("map_bounds must be [min_x, min_y, max_x, max_y]")
    roster: dict[str, Unit] = {}
    for entry in doc.get("roster", []):
        unit = Unit(
            id=str(entry["id"]),
            display_name=str(entry.get("display_name", entry["id"])),
            team_id=(None if entry.get("team_id") is None else str(entry["team_id"])),
            is_player=bool(entry.get("is_player", True)),
        )
        if unit.id in roster:
            raise ValidationError(f"duplicate unit id {unit.id!r} in roster")
        roster[unit.id] = unit
    marks = [(int(i), int(s)) for i, s in doc.get("round_marks", [])]
    return Session(
        id=str(doc["session_id"]),
        game_title=str(doc["game_title"]),
        duration_ms=int(doc["duration_ms"]),
        map_bounds=tuple(float(v) for v in bounds),
        roster=roster,
        round_marks=marks,
    )


def session_to_config(session: Session) -> dict[str, Any]:
    return {
        "session_id": session.id,
        "game_title": session.game_title,
        "duration_ms": session.duration_ms,
        "map_bounds": list(session.map_bounds),
        "roster": [
            {"id": u.id, "display_name": u.display_name,
             "team_id": u.team_id, "is_player": u.is_player}
            for u in session.roster.values()
        ],
        "round_marks": [list(m) for m in session.round_marks],
    }


class SessionStore:
    """Event storage for one session: append-at-ingest, immutable afterwards."""

    def __init__(self, session: Session, auto_register_units: bool = True):
        self.session = session
        self.auto_register_units = auto_register_units
        self._events: list[TelemetryEvent] = []
        self._by_id: dict[str, TelemetryEvent] = {}

    @property
    def events(self) -> Sequence[TelemetryEvent]:
        return self._events

    def ingest(self, records: Iterable[dict[str, Any]]) -> IngestReport:
        """Ingest raw event records. Malformed records are tallied and
        skipped; ingest never aborts mid-stream."""
        report = IngestReport()
        for record in records:
            try:
                event = self._accept(record, report)
            except _Reject as rej:
                report.rejected += 1
                report.errors[rej.reason] += 1
                continue
            self._events.append(event)
            self._by_id[event.event_id] = event
            report.accepted += 1
        self._events.sort(key=TelemetryEvent.sort_key)
        return report

    def _accept(self, record: dict[str, Any], report: IngestReport) -> TelemetryEvent:
        if not isinstance(record, dict):
            raise _Reject("bad_record")
        for name in REQUIRED_EVENT_FIELDS:
            if record.get(name) in (None, ""):
                raise _Reject("missing_field")
        if "session_id" in record and str(record["session_id"]) != self.session.id:
            raise _Reject("wrong_session")
        try:
            timestamp = int(record["timestamp_ms"])
        except (TypeError, ValueError):
            raise _Reject("bad_number")
        if not (0 <= timestamp <= self.session.duration_ms):
            raise _Reject("bad_timestamp")
        event_id = str(record["event_id"])
        if event_id in self._by_id:
            raise _Reject("duplicate_id")

        unit_id = str(record["unit_id"])
        if unit_id not in self.session.roster:
            if not self.auto_register_units:
                raise _Reject("unknown_unit")
            self.session.roster[unit_id] = Unit(id=unit_id, display_name=unit_id,
                                                team_id=None, is_player=False)
            report.auto_registered_units.append(unit_id)

        position = None
        has_x, has_y = record.get("x") is not None, record.get("y") is not None
        if has_x != has_y:
            raise _Reject("bad_position")
        if has_x:
            try:
                x, y = float(record["x"]), float(record["y"])
            except (TypeError, ValueError):
                raise _Reject("bad_number")
            if math.isnan(x) or math.isnan(y):
                raise _Reject("bad_number")
            cx, cy = self._clamp(x, y)
            if (cx, cy) != (x, y):
                report.clamped_positions += 1
            position = (cx, cy)

        payload = {key[len("payload."):]: str(value)
                   for key, value in record.items()
                   if key.startswith("payload.") and value is not None}
        return TelemetryEvent(
            event_id=event_id,
            session_id=self.session.id,
            timestamp_ms=timestamp,
            unit_id=unit_id,
            event_type=str(record["event_type"]),
            position=position,
            payload=payload,
        )

    def _clamp(self, x: float, y: float) -> tuple[float, float]:
        min_x, min_y, max_x, max_y = self.session.map_bounds
        return (min(max(x, min_x), max_x), min(max(y, min_y), max_y))

    def query(self, flt: EventFilter = EventFilter()) -> list[TelemetryEvent]:
        """Events satisfying all present filter clauses, in time order."""
        allowed_units: Optional[set[str]] = None
        if flt.team_ids is not None:
            allowed_units = {u.id for u in self.session.roster.values()
                             if u.team_id in flt.team_ids}
        out = []
        for ev in self._events:
            if flt.time_window is not None:
                lo, hi = flt.time_window
                if not (lo <= ev.timestamp_ms <= hi):
                    continue
            if flt.unit_ids is not None and ev.unit_id not in flt.unit_ids:
                continue
            if allowed_units is not None and ev.unit_id not in allowed_units:
                continue
            if flt.event_types is not None and ev.event_type not in flt.event_types:
                continue
            out.append(ev)
        return out

    def get_event(self, event_id: str) -> TelemetryEvent:
        try:
            return self._by_id[event_id]
        except KeyError:
            raise NotFoundError(f"unknown event {event_id!r}", event_id=event_id)

    def has_event(self, event_id: str) -> bool:
        return event_id in self._by_id

    def summary(self) -> dict[str, Any]:
        by_type: Counter = Counter(ev.event_type for ev in self._events)
        by_unit: Counter = Counter(ev.unit_id for ev in self._events)
        out: dict[str, Any] = {
            "session_id": self.session.id,
            "event_count": len(self._events),
            "by_type": {k: by_type[k] for k in sorted(by_type)},
            "by_unit": {k: by_unit[k] for k in sorted(by_unit)},
        }
        if self.session.round_marks:
            by_round: Counter = Counter(self.session.round_of(ev.timestamp_ms)
                                        for ev in self._events)
            out["by_round"] = {str(k): by_round[k] for k in sorted(by_round)}
        return out

    def audit(self) -> list[str]:
        """Store-wide consistency check; returns human-readable problems."""
        problems = []
        keys = [ev.sort_key() for ev in self._events]
        if keys != sorted(keys):
            problems.append("events not sorted by (timestamp_ms, event_id)")
        if len(self._by_id) != len(self._events):
            problems.append("event_id index out of sync with event list")
        min_x, min_y, max_x, max_y = self.session.map_bounds
        for ev in self._events:
            if not (0 <= ev.timestamp_ms <= self.session.duration_ms):
                problems.append(f"event {ev.event_id} timestamp outside session duration")
            if ev.unit_id not in self.session.roster:
                problems.append(f"event {ev.event_id} references unknown unit {ev.unit_id}")
            if ev.position is not None:
                x, y = ev.position
                if not (min_x <= x <= max_x and min_y <= y <= max_y):
                    problems.append(f"event {ev.event_id} position outside map bounds")
        return problems

    def iter_records(self) -> Iterator[dict[str, Any]]:
        for ev in self._events:
            yield ev.to_record()


class _Reject(Exception):
    def __init__(self, reason: str):
        self.reason = reason
