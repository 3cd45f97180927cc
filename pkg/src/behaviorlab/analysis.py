"""Sequence similarity and layout: DTW, distance matrices, agglomerative
clustering, and 2D embedding by stress majorization.

The state-difference function is a plug point: ``discrete`` (0/1 identity)
and ``jaccard`` (set overlap of composite constituents) ship built in, and
any callable ``(BehaviorState, BehaviorState) -> float in [0, 1]`` works.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .sequence import BehaviorSequence, BehaviorState, Owner, expand

StateMetricFn = Callable[[BehaviorState, BehaviorState], float]

METRICS = ("jaccard", "discrete")
MODES = ("collapsed", "expanded")


def discrete_distance(a: BehaviorState, b: BehaviorState) -> float:
    return 0.0 if a.canonical_name == b.canonical_name else 1.0


def jaccard_distance(a: BehaviorState, b: BehaviorState) -> float:
    inter = len(a.constituents & b.constituents)
    union = len(a.constituents | b.constituents)
    return 1.0 - inter / union


def get_metric(metric: str | StateMetricFn) -> StateMetricFn:
    if callable(metric):
        return metric
    if metric == "discrete":
        return discrete_distance
    if metric == "jaccard":
        return jaccard_distance
    raise ValidationError(f"unknown state metric {metric!r}", metric=str(metric))


def state_distance(a: BehaviorState, b: BehaviorState,
                   metric: str | StateMetricFn = "jaccard") -> float:
    return get_metric(metric)(a, b)


def _mode_states(seq: BehaviorSequence, mode: str) -> list[BehaviorState]:
    if mode == "collapsed":
        return seq.states()
    if mode == "expanded":
        return expand(seq)
    raise ValidationError(f"unknown mode {mode!r}", mode=mode)


def dtw_state_lists(a: Sequence[BehaviorState], b: Sequence[BehaviorState],
                    metric: str | StateMetricFn = "jaccard",
                    normalized: bool = False) -> float:
    """DTW over two state lists with the classic recurrence

        D(i,j) = d(i,j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)).

    Unnormalized by default; ``normalized=True`` divides by the optimal
    warping path's cell count (diagonal preferred on ties).
    """
    if not a or not b:
        raise DegenerateInputError("DTW requires two non-empty sequences",
                                   len_a=len(a), len_b=len(b))
    dist = get_metric(metric)
    n, m = len(a), len(b)
    prev = [0.0] * m
    prev_steps = [0] * m
    cur = [0.0] * m
    cur_steps = [0] * m
    for i in range(n):
        ai = a[i]
        for j in range(m):
            d = dist(ai, b[j])
            if i == 0 and j == 0:
                cur[j] = d
                cur_steps[j] = 1
            elif i == 0:
                cur[j] = d + cur[j - 1]
                cur_steps[j] = cur_steps[j - 1] + 1
            elif j == 0:
                cur[j] = d + prev[j]
                cur_steps[j] = prev_steps[j] + 1
            else:
                best, steps = prev[j - 1], prev_steps[j - 1]
                if prev[j] < best:
                    best, steps = prev[j], prev_steps[j]
                if cur[j - 1] < best:
                    best, steps = cur[j - 1], cur_steps[j - 1]
                cur[j] = d + best
                cur_steps[j] = steps + 1
        prev, cur = cur, prev
        prev_steps, cur_steps = cur_steps, prev_steps
    total = prev[m - 1]
    return total / prev_steps[m - 1] if normalized else total


def dtw_distance(seq_a: BehaviorSequence, seq_b: BehaviorSequence,
                 metric: str | StateMetricFn = "jaccard",
                 mode: str = "collapsed", normalized: bool = False) -> float:
    """Dissimilarity of two behavior sequences.

    ``collapsed`` compares run-length-collapsed state lists (repeat counts
    ignored); ``expanded`` unrolls repeats first.
    """
    return dtw_state_lists(_mode_states(seq_a, mode), _mode_states(seq_b, mode),
                           metric=metric, normalized=normalized)


@dataclass
class DistanceMatrix:
    owners: list[Owner]
    values: list[list[float]]

    def to_doc(self) -> dict:
        return {
            "owners": [o.to_doc() for o in self.owners],
            "values": self.values,
        }

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def index_of(self, owner_id: str) -> int:
        for i, o in enumerate(self.owners):
            if o.id == owner_id:
                return i
        raise ValidationError(f"owner {owner_id!r} not in matrix", owner_id=owner_id)


def distance_matrix(sequences: Sequence[BehaviorSequence],
                    metric: str | StateMetricFn = "jaccard",
                    mode: str = "collapsed",
                    normalized: bool = False) -> DistanceMatrix:
    """Pairwise DTW matrix: computed for i < j only and mirrored, so the
    result is symmetric with a zero diagonal by construction."""
    if len(sequences) < 2:
        raise DegenerateInputError("distance matrix needs at least 2 sequences",
                                   count=len(sequences))
    n = len(sequences)
    values = [[0.0] * n for _ in range(n)]
    state_lists = [_mode_states(s, mode) for s in sequences]
    for i, states in enumerate(state_lists):
        if not states:
            raise DegenerateInputError(
                f"sequence for {sequences[i].owner.id!r} is empty",
                owner=sequences[i].owner.id)
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_state_lists(state_lists[i], state_lists[j],
                                metric=metric, normalized=normalized)
            values[i][j] = d
            values[j][i] = d
    return DistanceMatrix(owners=[s.owner for s in sequences], values=values)


@dataclass
class Clustering:
    assignment: dict[str, int]  # owner id -> cluster id
    method: str
    parameter: int

    def clusters(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for owner_id, cid in self.assignment.items():
            out.setdefault(cid, []).append(owner_id)
        return {cid: sorted(members) for cid, members in sorted(out.items())}


def cluster(matrix: DistanceMatrix, k: int) -> Clustering:
    """Average-linkage agglomerative clustering cut at ``k`` clusters.

    Deterministic: merge ties are broken by the smallest (i, j) pair of the
    clusters' minimal original indices.
    """
    n = len(matrix.owners)
    if k < 1:
        raise ValidationError("k must be >= 1", k=k)
    if k > n:
        raise ValidationError(f"k={k} exceeds owner count {n}", k=k, owners=n)
    d = matrix.values
    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > k:
        best: Optional[tuple[float, int, int, int, int]] = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                total = 0.0
                for i in clusters[a]:
                    row = d[i]
                    for j in clusters[b]:
                        total += row[j]
                avg = total / (len(clusters[a]) * len(clusters[b]))
                lo, hi = min(clusters[a][0], clusters[b][0]), max(clusters[a][0], clusters[b][0])
                key = (avg, lo, hi, a, b)
                if best is None or key < best:
                    best = key
        _, _, _, a, b = best
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
    clusters.sort(key=lambda members: members[0])
    assignment = {}
    for cid, members in enumerate(clusters):
        for i in members:
            assignment[matrix.owners[i].id] = cid
    return Clustering(assignment=assignment, method="average-agglomerative", parameter=k)


@dataclass
class Embedding2D:
    owners: list[Owner]
    coordinates: np.ndarray  # (n, 2)
    final_stress: float
    iterations: int
    seed: int
    stress_trace: list[float] = field(default_factory=list)

    def position_of(self, owner_id: str) -> tuple[float, float]:
        for i, o in enumerate(self.owners):
            if o.id == owner_id:
                return (float(self.coordinates[i, 0]), float(self.coordinates[i, 1]))
        raise ValidationError(f"owner {owner_id!r} not embedded", owner_id=owner_id)


def raw_stress(coords: np.ndarray, targets: np.ndarray) -> float:
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    err = dist - targets
    iu = np.triu_indices(len(coords), k=1)
    return float((err[iu] ** 2).sum())


def embed_2d(matrix: DistanceMatrix, seed: int = 0, max_iterations: int = 500,
             stress_tolerance: float = 1e-10) -> Embedding2D:
    """Metric MDS by stress majorization (Guttman transform, unit weights).

    Minimizes raw stress sum_{i<j} (|x_i - x_j| - d_ij)^2 starting from a
    seeded uniform draw in the unit square. The per-iteration stress trace
    is non-increasing; iteration stops at ``max_iterations`` or when the
    relative stress improvement falls below ``stress_tolerance``.
    """
    targets = matrix.as_array()
    n = len(matrix.owners)
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    trace = [raw_stress(coords, targets)]
    iterations = 0
    for _ in range(max_iterations):
        coords = _guttman_step(coords, targets)
        iterations += 1
        stress = raw_stress(coords, targets)
        trace.append(stress)
        prev = trace[-2]
        if prev <= 0.0:
            break
        if (prev - stress) / prev < stress_tolerance:
            break
    return Embedding2D(owners=list(matrix.owners), coordinates=coords,
                       final_stress=trace[-1], iterations=iterations,
                       seed=seed, stress_trace=trace)


def _guttman_step(coords: np.ndarray, targets: np.ndarray) -> np.ndarray:
    n = len(coords)
    diff = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0.0, targets / dist, 0.0)
    b = -ratio
    b[np.arange(n), np.arange(n)] = ratio.sum(axis=1)
    return b @ coords / n
