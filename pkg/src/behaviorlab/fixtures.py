"""Deterministic synthetic datasets.

Real labeled match data is proprietary, so the quantitative checks run on a
generated stand-in: N cohorts of players, each cohort following its own
behavior palette with per-player jitter. Players inside a cohort end up with
similar sequences while cohorts stay mutually distant, which is exactly the
structure the similarity pipeline must recover.
"""

from __future__ import annotations

import random
from typing import Any

BEHAVIOR_VOCABULARY = [
    ("Farm", "repeatedly killing neutral entities for resources"),
    ("Push", "advancing on enemy structures"),
    ("Kill", "eliminating an enemy unit"),
    ("Group Fight", "small engagement involving part of each team"),
    ("Roam", "moving about the map without direct engagement"),
    ("Gank", "surprise attack on an enemy lane"),
    ("Team Fight", "engagement involving most of both teams"),
    ("Roshan", "engaging the strongest neutral entity"),
    ("Split Push", "pushing one lane while the rest distract"),
]

EVENT_TYPES = ["move", "attack", "use_item", "collect"]

ROUND_MS = 60_000


def _palette(cohort: int) -> list[str]:
    names = [name for name, _ in BEHAVIOR_VOCABULARY]
    offset = (cohort * 4) % len(names)
    return [names[(offset + i) % len(names)] for i in range(4)]


def synth_dataset(cohorts: int = 2, players_per: int = 5, seed: int = 7,
                  rounds: int = 3) -> dict[str, Any]:
    """Generate a synthetic session: config, event records, and two parallel
    raters' label documents (rater B duplicates rater A's labels)."""
    if cohorts < 1 or players_per < 1 or rounds < 1:
        raise ValueError("cohorts, players_per, and rounds must all be >= 1")
    rng = random.Random(seed)
    session_id = f"synth-c{cohorts}x{players_per}-s{seed}"
    duration = rounds * ROUND_MS

    roster = []
    for c in range(cohorts):
        for k in range(players_per):
            roster.append({
                "id": f"p{c}{k}",
                "display_name": f"Player {c}.{k}",
                "team_id": f"team{c}",
                "is_player": True,
            })
    roster.append({"id": "npc0", "display_name": "Creep", "team_id": None,
                   "is_player": False})

    config = {
        "session_id": session_id,
        "game_title": "synthetic-arena",
        "duration_ms": duration,
        "map_bounds": [0.0, 0.0, 1000.0, 1000.0],
        "roster": roster,
        "round_marks": [[r + 1, r * ROUND_MS] for r in range(rounds)],
        "vocabulary": {
            "game_title": "synthetic-arena",
            "entries": [{"name": n, "description": d} for n, d in BEHAVIOR_VOCABULARY],
        },
    }

    # Telemetry: a steady event stream per unit, positions inside bounds.
    events: list[dict[str, Any]] = []
    for unit in roster:
        t = rng.randrange(0, 1200)
        step_hi = 2600 if unit["is_player"] else 9000
        while t <= duration:
            events.append({
                "session_id": session_id,
                "unit_id": unit["id"],
                "timestamp_ms": t,
                "event_type": rng.choice(EVENT_TYPES),
                "x": round(rng.uniform(0.0, 1000.0), 2),
                "y": round(rng.uniform(0.0, 1000.0), 2),
                "payload.speed": str(rng.randrange(1, 9)),
            })
            t += rng.randrange(900, step_hi)
    events.sort(key=lambda e: (e["timestamp_ms"], e["unit_id"]))
    for n, ev in enumerate(events):
        ev["event_id"] = f"e{n:06d}"
    events_by_unit: dict[str, list[dict[str, Any]]] = {}
    for ev in events:
        events_by_unit.setdefault(ev["unit_id"], []).append(ev)

    # Rater A labels: per player, rounds of palette-cycling intervals with
    # jittered durations and occasional substitutions; per team, a few
    # multi-player windows that make team sequences non-empty.
    labels: list[dict[str, Any]] = []
    counter = 0

    def add_label(name: str, start: int, end: int, unit_ids: list[str],
                  event_ids: list[str]) -> None:
        nonlocal counter
        counter += 1
        labels.append({
            "label_id": f"{session_id}:synth{counter:04d}",
            "session_id": session_id,
            "name": name,
            "start_ms": start,
            "end_ms": end,
            "unit_ids": sorted(unit_ids),
            "event_ids": sorted(event_ids),
            "author": "raterA",
            "created_at": 1_700_000_000_000 + counter,
        })

    def events_in(unit_id: str, start: int, end: int, limit: int) -> list[str]:
        hits = [ev["event_id"] for ev in events_by_unit.get(unit_id, [])
                if start <= ev["timestamp_ms"] <= end]
        return hits[:limit]

    for c in range(cohorts):
        palette = _palette(c)
        for k in range(players_per):
            pid = f"p{c}{k}"
            slot = 0
            for r in range(rounds):
                t = r * ROUND_MS + rng.randrange(0, 1500)
                round_end = (r + 1) * ROUND_MS
                while t < round_end - 4000:
                    name = palette[slot % len(palette)]
                    if rng.random() < 0.18:
                        name = rng.choice(palette)
                    span = rng.randrange(5000, 9000)
                    end = min(t + span, round_end)
                    add_label(name, t, end, [pid], events_in(pid, t, end, 2))
                    slot += 1
                    t = end + (rng.randrange(0, 1800) if rng.random() < 0.5 else 0)
        if players_per >= 2:
            members = [f"p{c}{k}" for k in range(players_per)]
            for r in range(rounds):
                start = r * ROUND_MS + rng.randrange(8000, 20_000)
                end = start + rng.randrange(6000, 12_000)
                chosen = sorted(rng.sample(members, min(3, players_per)))
                eids = [eid for pid in chosen for eid in events_in(pid, start, end, 1)]
                add_label(palette[3], start, end, chosen, eids)
                if rng.random() < 0.7:
                    # a second engagement, often overlapping the first so the
                    # team sequence exercises composite states
                    start2 = start + rng.randrange(3000, 9000)
                    end2 = min(start2 + rng.randrange(5000, 10_000), (r + 1) * ROUND_MS)
                    if end2 > start2:
                        chosen2 = sorted(rng.sample(members, 2))
                        add_label(palette[2], start2, end2, chosen2,
                                  [eid for pid in chosen2
                                   for eid in events_in(pid, start2, end2, 1)])

    # Rater B: an independent pass that happens to agree exactly; gives the
    # agreement path a known-perfect fixture.
    mirrored = []
    for n, doc in enumerate(labels, start=1):
        copy = dict(doc)
        copy["label_id"] = f"{session_id}:mirror{n:04d}"
        copy["author"] = "raterB"
        mirrored.append(copy)

    return {
        "config": config,
        "events": events,
        "labels": {"session_id": session_id, "labels": labels + mirrored},
        "session_id": session_id,
    }
