"""Label sets -> per-player and per-team behavior sequences.

The conversion sweeps the owner's labels over time. Simultaneously active
label names fuse into one composite state (canonical name: constituents
sorted lexicographically, joined with " - "), maximal constant-set segments
become state occurrences, and consecutive identical states collapse into one
element carrying a repeat count.

Intervals are half-open [start_ms, end_ms): a label ending at t and another
starting at t touch but do not overlap, so they never form a composite.
Unlabeled gaps produce no state at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import NotFoundError, ValidationError
from .labeling import Label, is_team_label, team_of_label
from .telemetry import Unit

STATE_SEPARATOR = " - "


@dataclass(frozen=True)
class BehaviorState:
    """One node of the behavior alphabet: a set of simultaneously active
    label names. Identity is the canonical name."""

    constituents: frozenset[str]

    def __post_init__(self):
        if not self.constituents:
            raise ValidationError("behavior state needs at least one constituent")

    @property
    def canonical_name(self) -> str:
        return STATE_SEPARATOR.join(sorted(self.constituents))

    @staticmethod
    def of(*names: str) -> "BehaviorState":
        return BehaviorState(frozenset(names))

    def __str__(self) -> str:
        return self.canonical_name

    def __lt__(self, other: "BehaviorState") -> bool:
        return self.canonical_name < other.canonical_name


@dataclass(frozen=True)
class Occurrence:
    """One maximal segment of a constant non-empty active-label set."""

    state: BehaviorState
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class SequenceElement:
    state: BehaviorState
    repeat_count: int
    first_start_ms: int
    last_end_ms: int


@dataclass(frozen=True)
class Owner:
    kind: str  # "player" | "team"
    id: str

    def to_doc(self) -> dict:
        return {"kind": self.kind, "id": self.id}


@dataclass
class BehaviorSequence:
    owner: Owner
    session_id: str
    rater: str
    elements: list[SequenceElement] = field(default_factory=list)
    # Pre-collapse occurrences with their time spans; round scoping needs
    # them because a collapsed element can straddle a round boundary.
    occurrences: list[Occurrence] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.elements)

    def expanded_length(self) -> int:
        return sum(el.repeat_count for el in self.elements)

    def states(self) -> list[BehaviorState]:
        return [el.state for el in self.elements]

    def to_doc(self) -> dict:
        return {
            "owner": self.owner.to_doc(),
            "rater": self.rater,
            "elements": [
                {
                    "state": el.state.canonical_name,
                    "constituents": sorted(el.state.constituents),
                    "count": el.repeat_count,
                    "start_ms": el.first_start_ms,
                    "end_ms": el.last_end_ms,
                }
                for el in self.elements
            ],
        }


def sweep_segments(labels: Sequence[Label]) -> list[Occurrence]:
    """Maximal constant-set segments over the given labels' intervals.

    Segment boundaries are exactly the sorted distinct label endpoints;
    adjacent segments with identical name sets are merged, empty sets are
    dropped.
    """
    if not labels:
        return []
    breakpoints = sorted({t for l in labels for t in (l.start_ms, l.end_ms)})
    segments: list[tuple[frozenset[str], int, int]] = []
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        active = frozenset(l.name for l in labels if l.start_ms <= lo and l.end_ms >= hi)
        if segments and segments[-1][0] == active and segments[-1][2] == lo:
            prev = segments[-1]
            segments[-1] = (prev[0], prev[1], hi)
        else:
            segments.append((active, lo, hi))
    return [Occurrence(BehaviorState(names), lo, hi)
            for names, lo, hi in segments if names]


def collapse_occurrences(occurrences: Sequence[Occurrence]) -> list[SequenceElement]:
    """Run-length collapse: consecutive occurrences of the same state fold
    into one element whose repeat count is the number of occurrences."""
    elements: list[SequenceElement] = []
    for occ in occurrences:
        if elements and elements[-1].state == occ.state:
            last = elements[-1]
            elements[-1] = SequenceElement(last.state, last.repeat_count + 1,
                                           last.first_start_ms, occ.end_ms)
        else:
            elements.append(SequenceElement(occ.state, 1, occ.start_ms, occ.end_ms))
    return elements


def collapse_states(states: Iterable[BehaviorState]) -> list[tuple[BehaviorState, int]]:
    out: list[tuple[BehaviorState, int]] = []
    for state in states:
        if out and out[-1][0] == state:
            out[-1] = (state, out[-1][1] + 1)
        else:
            out.append((state, 1))
    return out


def expand(sequence: BehaviorSequence) -> list[BehaviorState]:
    """Unroll repeat counts into the complete ordered state list."""
    out: list[BehaviorState] = []
    for el in sequence.elements:
        out.extend([el.state] * el.repeat_count)
    return out


def _check_label_set(labels: Sequence[Label], roster: dict[str, Unit]) -> None:
    sessions = {l.session_id for l in labels}
    if len(sessions) > 1:
        raise ValidationError("labels span multiple sessions", sessions=sorted(sessions))
    raters = {l.author for l in labels}
    if len(raters) > 1:
        raise ValidationError("labels span multiple raters", raters=sorted(raters))
    for l in labels:
        for uid in l.unit_ids:
            if uid not in roster:
                raise ValidationError(
                    f"label {l.label_id!r} references unit {uid!r} absent from roster",
                    label_id=l.label_id, unit_id=uid)


def player_occurrences(labels: Sequence[Label], player_id: str,
                       roster: dict[str, Unit]) -> list[Occurrence]:
    """Timed state occurrences for one player. Team labels covering the
    player contribute exactly like individual labels."""
    if player_id not in roster:
        raise NotFoundError(f"unknown player {player_id!r}", player_id=player_id)
    _check_label_set(labels, roster)
    mine = [l for l in labels if player_id in l.unit_ids]
    return sweep_segments(mine)


def team_occurrences(labels: Sequence[Label], team_id: str,
                     roster: dict[str, Unit]) -> list[Occurrence]:
    """Timed state occurrences for one team: only team labels whose player
    units lie in strict majority on that team participate."""
    teams = {u.team_id for u in roster.values() if u.team_id is not None}
    if team_id not in teams:
        raise NotFoundError(f"unknown team {team_id!r}", team_id=team_id)
    _check_label_set(labels, roster)
    ours = [l for l in labels
            if is_team_label(l, roster) and team_of_label(l, roster) == team_id]
    return sweep_segments(ours)


def build_player_sequence(labels: Sequence[Label], player_id: str,
                          roster: dict[str, Unit], rater: Optional[str] = None,
                          session_id: Optional[str] = None) -> BehaviorSequence:
    occurrences = player_occurrences(labels, player_id, roster)
    return BehaviorSequence(
        owner=Owner("player", player_id),
        session_id=session_id or (labels[0].session_id if labels else ""),
        rater=rater or (labels[0].author if labels else ""),
        elements=collapse_occurrences(occurrences),
        occurrences=occurrences,
    )


def build_team_sequence(labels: Sequence[Label], team_id: str,
                        roster: dict[str, Unit], rater: Optional[str] = None,
                        session_id: Optional[str] = None) -> BehaviorSequence:
    occurrences = team_occurrences(labels, team_id, roster)
    return BehaviorSequence(
        owner=Owner("team", team_id),
        session_id=session_id or (labels[0].session_id if labels else ""),
        rater=rater or (labels[0].author if labels else ""),
        elements=collapse_occurrences(occurrences),
        occurrences=occurrences,
    )
