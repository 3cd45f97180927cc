"""Transition state graphs and the similarity-layout scatter models.

The state graph counts visits and traversals over EXPANDED sequences, so a
collapsed element with repeat count r contributes r visits and r-1 self-loop
traversals; the per-state repetition counts shown next to sequences stay
derivable from the graph. Node size and edge thickness are exported as raw
counts; visual scaling belongs to the UI.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Any, Sequence

from .analysis import Clustering, DistanceMatrix, cluster, distance_matrix, embed_2d
from .errors import DegenerateInputError, NotFoundError, ValidationError
from .sequence import (BehaviorSequence, Occurrence, Owner, collapse_occurrences,
                       expand)
from .telemetry import Unit

EXPORT_FORMATS = ("structured-json", "dot")


@dataclass
class StateGraph:
    nodes: dict[str, int] = field(default_factory=dict)        # state -> visit count
    starts: dict[str, int] = field(default_factory=dict)       # state -> sequence starts
    edges: dict[tuple[str, str], int] = field(default_factory=dict)

    def total_visits(self) -> int:
        return sum(self.nodes.values())

    def incoming(self, state: str) -> int:
        return sum(c for (_, dst), c in self.edges.items() if dst == state)

    def outgoing(self, state: str) -> int:
        return sum(c for (src, _), c in self.edges.items() if src == state)

    def end_counts(self) -> dict[str, int]:
        return {s: self.nodes[s] - self.outgoing(s) for s in self.nodes}

    def check_flow(self) -> list[str]:
        """Flow-conservation violations (empty when consistent)."""
        problems = []
        for state, visits in self.nodes.items():
            inflow = self.starts.get(state, 0) + self.incoming(state)
            if visits != inflow:
                problems.append(
                    f"state {state!r}: visits={visits} != starts+incoming={inflow}")
            if visits - self.outgoing(state) < 0:
                problems.append(f"state {state!r}: more outgoing traversals than visits")
        for state in self.starts:
            if state not in self.nodes:
                problems.append(f"start state {state!r} missing from nodes")
        for (src, dst) in self.edges:
            if src not in self.nodes or dst not in self.nodes:
                problems.append(f"edge {src!r}->{dst!r} references missing node")
        return problems


def build_state_graph(sequences: Sequence[BehaviorSequence]) -> StateGraph:
    """Aggregate transition graph over one rater's sequences (one scope)."""
    graph = StateGraph()
    for seq in sequences:
        names = [s.canonical_name for s in expand(seq)]
        if not names:
            continue
        graph.starts[names[0]] = graph.starts.get(names[0], 0) + 1
        for name in names:
            graph.nodes[name] = graph.nodes.get(name, 0) + 1
        for src, dst in zip(names, names[1:]):
            graph.edges[(src, dst)] = graph.edges.get((src, dst), 0) + 1
    return graph


def replay_to_zero(graph: StateGraph, sequences: Sequence[BehaviorSequence]) -> bool:
    """Replaying every trajectory must consume the graph's counts exactly."""
    nodes = dict(graph.nodes)
    starts = dict(graph.starts)
    edges = dict(graph.edges)
    for seq in sequences:
        names = [s.canonical_name for s in expand(seq)]
        if not names:
            continue
        starts[names[0]] = starts.get(names[0], 0) - 1
        for name in names:
            nodes[name] = nodes.get(name, 0) - 1
        for pair in zip(names, names[1:]):
            edges[pair] = edges.get(pair, 0) - 1
    return (all(v == 0 for v in nodes.values())
            and all(v == 0 for v in starts.values())
            and all(v == 0 for v in edges.values()))


def round_containing(round_marks: Sequence[tuple[int, int]], timestamp_ms: int) -> int:
    starts = [s for _, s in round_marks]
    pos = bisect_right(starts, timestamp_ms) - 1
    if pos < 0:
        pos = 0  # instants before the first mark fold into the first round
    return round_marks[pos][0]


def round_scoped_graphs(sequences: Sequence[BehaviorSequence],
                        round_marks: Sequence[tuple[int, int]]) -> dict[int, StateGraph]:
    """One state graph per round; occurrences attach to the round containing
    their segment start, so per-round visit counts sum to session counts."""
    if not round_marks:
        raise ValidationError("session has no round marks")
    per_round_sequences: dict[int, list[BehaviorSequence]] = {
        idx: [] for idx, _ in round_marks}
    for seq in sequences:
        buckets: dict[int, list[Occurrence]] = {}
        for occ in seq.occurrences:
            buckets.setdefault(round_containing(round_marks, occ.start_ms), []).append(occ)
        for round_index, occs in buckets.items():
            per_round_sequences[round_index].append(BehaviorSequence(
                owner=seq.owner, session_id=seq.session_id, rater=seq.rater,
                elements=collapse_occurrences(occs), occurrences=occs))
    return {idx: build_state_graph(per_round_sequences[idx])
            for idx, _ in round_marks}


@dataclass
class ScatterNode:
    owner: Owner
    x: float
    y: float
    cluster: int

    def to_doc(self) -> dict[str, Any]:
        return {"owner": self.owner.to_doc(), "x": self.x, "y": self.y,
                "cluster": self.cluster}


@dataclass
class SequenceGraphModel:
    """Per-owner scatter: DTW-similar sequences land near each other."""

    scope: str  # "player" | "team"
    nodes: list[ScatterNode]
    matrix: DistanceMatrix
    clustering: Clustering
    excluded: list[Owner]  # owners dropped for having no labeled states
    params: dict[str, Any]
    final_stress: float
    seed: int

    def to_doc(self) -> dict[str, Any]:
        return {
            "scope": self.scope,
            "nodes": [n.to_doc() for n in self.nodes],
            "excluded": [o.to_doc() for o in self.excluded],
            "matrix": self.matrix.to_doc(),
            "params": self.params,
            "final_stress": self.final_stress,
            "seed": self.seed,
        }


def _build_scatter(sequences: Sequence[BehaviorSequence], scope: str, metric: str,
                   k: int, seed: int, mode: str, max_iterations: int,
                   stress_tolerance: float) -> SequenceGraphModel:
    non_empty = [s for s in sequences if len(s.elements) > 0]
    excluded = [s.owner for s in sequences if len(s.elements) == 0]
    if len(non_empty) < 2:
        raise DegenerateInputError(
            f"{scope} graph needs at least 2 non-empty sequences, got {len(non_empty)}",
            scope=scope, non_empty=len(non_empty))
    matrix = distance_matrix(non_empty, metric=metric, mode=mode)
    clustering = cluster(matrix, k)
    embedding = embed_2d(matrix, seed=seed, max_iterations=max_iterations,
                         stress_tolerance=stress_tolerance)
    nodes = [
        ScatterNode(owner=owner,
                    x=float(embedding.coordinates[i, 0]),
                    y=float(embedding.coordinates[i, 1]),
                    cluster=clustering.assignment[owner.id])
        for i, owner in enumerate(matrix.owners)
    ]
    params = {"metric": metric, "k": k, "mode": mode}
    return SequenceGraphModel(scope=scope, nodes=nodes, matrix=matrix,
                              clustering=clustering, excluded=excluded,
                              params=params, final_stress=embedding.final_stress,
                              seed=seed)


def build_sequence_graph(player_sequences: Sequence[BehaviorSequence],
                         metric: str = "jaccard", k: int = 2, seed: int = 0,
                         mode: str = "collapsed", max_iterations: int = 500,
                         stress_tolerance: float = 1e-10) -> SequenceGraphModel:
    return _build_scatter(player_sequences, "player", metric, k, seed, mode,
                          max_iterations, stress_tolerance)


def build_group_graph(team_sequences: Sequence[BehaviorSequence],
                      metric: str = "jaccard", k: int = 2, seed: int = 0,
                      mode: str = "collapsed", max_iterations: int = 500,
                      stress_tolerance: float = 1e-10) -> SequenceGraphModel:
    return _build_scatter(team_sequences, "team", metric, k, seed, mode,
                          max_iterations, stress_tolerance)


def select_team(sequence_model: SequenceGraphModel, team_id: str,
                roster: dict[str, Unit],
                player_sequences: Sequence[BehaviorSequence]) -> dict[str, Any]:
    """Selecting a team highlights its members present in the sequence
    scatter together with their state-graph trajectories."""
    teams = {u.team_id for u in roster.values() if u.team_id is not None}
    if team_id not in teams:
        raise NotFoundError(f"unknown team {team_id!r}", team_id=team_id)
    present = {node.owner.id for node in sequence_model.nodes}
    members = sorted(u.id for u in roster.values()
                     if u.is_player and u.team_id == team_id and u.id in present)
    by_owner = {s.owner.id: s for s in player_sequences}
    trajectories = {
        pid: [{"state": el.state.canonical_name, "count": el.repeat_count}
              for el in by_owner[pid].elements]
        for pid in members if pid in by_owner
    }
    return {"team_id": team_id, "members": members, "trajectories": trajectories}


# -- export ------------------------------------------------------------------

def state_graph_to_doc(graph: StateGraph) -> dict[str, Any]:
    return {
        "nodes": [{"state": s, "visits": graph.nodes[s],
                   "starts": graph.starts.get(s, 0)}
                  for s in sorted(graph.nodes)],
        "edges": [{"from": src, "to": dst, "count": graph.edges[(src, dst)]}
                  for src, dst in sorted(graph.edges)],
    }


def state_graph_from_doc(doc: dict[str, Any]) -> StateGraph:
    graph = StateGraph()
    for node in doc.get("nodes", []):
        graph.nodes[str(node["state"])] = int(node["visits"])
        if int(node.get("starts", 0)):
            graph.starts[str(node["state"])] = int(node["starts"])
    for edge in doc.get("edges", []):
        graph.edges[(str(edge["from"]), str(edge["to"]))] = int(edge["count"])
    return graph


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def state_graph_to_dot(graph: StateGraph, name: str = "behavior") -> str:
    """Deterministic DOT rendering: sorted nodes then sorted edges, node size
    carried as the raw visit count."""
    lines = [f"digraph {_dot_quote(name)} {{"]
    for state in sorted(graph.nodes):
        lines.append(f"  {_dot_quote(state)} [visits={graph.nodes[state]}, "
                     f"starts={graph.starts.get(state, 0)}];")
    for (src, dst) in sorted(graph.edges):
        lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)} "
                     f"[count={graph.edges[(src, dst)]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def scatter_to_dot(model: SequenceGraphModel, name: str = "sequences") -> str:
    lines = [f"graph {_dot_quote(name)} {{"]
    for node in sorted(model.nodes, key=lambda n: n.owner.id):
        lines.append(
            f"  {_dot_quote(node.owner.id)} "
            f'[pos="{node.x!r},{node.y!r}!", cluster={node.cluster}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(model: StateGraph | SequenceGraphModel, fmt: str) -> Any:
    """Export a graph model: 'structured-json' round-trips losslessly, 'dot'
    is for rendering."""
    if fmt == "structured-json":
        return state_graph_to_doc(model) if isinstance(model, StateGraph) else model.to_doc()
    if fmt == "dot":
        return state_graph_to_dot(model) if isinstance(model, StateGraph) else scatter_to_dot(model)
    raise ValidationError(f"unknown export format {fmt!r}", format=fmt,
                          known=list(EXPORT_FORMATS))
