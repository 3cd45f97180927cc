from __future__ import annotations

import math
import random

import numpy as np
import pytest

from behaviorlab.analysis import (DistanceMatrix, cluster,
                                  discrete_distance, distance_matrix,
                                  dtw_distance, dtw_state_lists, embed_2d,
                                  get_metric, jaccard_distance, raw_stress,
                                  state_distance)
from behaviorlab.errors import DegenerateInputError, ValidationError
from behaviorlab.sequence import (BehaviorSequence, BehaviorState, Owner,
                                  SequenceElement)

from dtw_oracle import brute_force_dtw

A, B, C = BehaviorState.of("A"), BehaviorState.of("B"), BehaviorState.of("C")


def seq(owner_id, *entries) -> BehaviorSequence:
    """entries: state names or (name, count) pairs, already collapsed."""
    elements = []
    t = 0
    for entry in entries:
        name, count = entry if isinstance(entry, tuple) else (entry, 1)
        state = (name if isinstance(name, BehaviorState)
                 else BehaviorState.of(*name.split("+")))
        elements.append(SequenceElement(state, count, t, t + 10 * count))
        t += 10 * count
    return BehaviorSequence(Owner("player", owner_id), "s1", "A", elements)


# -- state metrics --------------------------------------------------------------

def test_discrete_identity():
    assert state_distance(BehaviorState.of("Farm"), BehaviorState.of("Farm"),
                          "discrete") == 0.0


def test_jaccard_partial_overlap():
    a = BehaviorState.of("Team Fight")
    b = BehaviorState.of("Team Fight", "Gank")
    assert state_distance(a, b, "jaccard") == 0.5


def test_jaccard_disjoint():
    assert state_distance(BehaviorState.of("Push"), BehaviorState.of("Farm"),
                          "jaccard") == 1.0


def test_metric_axioms_on_random_states():
    rng = random.Random(3)
    pool = ["Farm", "Push", "Gank", "Roam", "Kill"]
    for metric in (discrete_distance, jaccard_distance):
        for _ in range(100):
            a = BehaviorState(frozenset(rng.sample(pool, rng.randrange(1, 4))))
            b = BehaviorState(frozenset(rng.sample(pool, rng.randrange(1, 4))))
            assert metric(a, a) == 0.0
            assert metric(a, b) == metric(b, a)
            assert 0.0 <= metric(a, b) <= 1.0


def test_unknown_metric():
    with pytest.raises(ValidationError):
        get_metric("cosine")


def test_custom_metric_callable():
    always_half = lambda a, b: 0.0 if a == b else 0.5
    assert dtw_state_lists([A], [B], metric=always_half) == 0.5


# -- DTW -------------------------------------------------------------------------

def test_identical_sequences_zero():
    assert dtw_distance(seq("x", "A", "B"), seq("y", "A", "B"), "discrete") == 0.0


def test_warping_absorbs_repeats_in_both_modes():
    a = seq("x", ("A", 1))
    b = seq("y", ("A", 3))
    assert dtw_distance(a, b, "discrete", mode="collapsed") == 0.0
    assert dtw_distance(a, b, "discrete", mode="expanded") == 0.0


def test_swap_costs_two_by_path_enumeration():
    # All 3 warping paths on the 2x2 grid, enumerated:
    #   (00,11) -> d(A,B)+d(B,A) = 2
    #   (00,01,11) -> 1+1+1 = 3
    #   (00,10,11) -> 3
    got = dtw_distance(seq("x", "A", "B"), seq("y", "B", "A"), "discrete")
    assert got == 2.0
    assert got == brute_force_dtw([A, B], [B, A], discrete_distance)


def test_empty_sequence_is_defined_empty_error():
    with pytest.raises(DegenerateInputError):
        dtw_distance(seq("x"), seq("y", "A"), "discrete")


def test_dtw_symmetry_and_self_zero_randomized():
    rng = random.Random(11)
    states = [A, B, C, BehaviorState.of("A", "B")]
    for metric in ("discrete", "jaccard"):
        for _ in range(60):
            xs = [rng.choice(states) for _ in range(rng.randrange(1, 7))]
            ys = [rng.choice(states) for _ in range(rng.randrange(1, 7))]
            assert dtw_state_lists(xs, xs, metric) == 0.0
            assert (dtw_state_lists(xs, ys, metric)
                    == dtw_state_lists(ys, xs, metric))


def test_dtw_matches_oracle_randomized():
    rng = random.Random(17)
    states = [A, B, C]
    for metric_name, metric_fn in (("discrete", discrete_distance),
                                   ("jaccard", jaccard_distance)):
        for _ in range(120):
            xs = [rng.choice(states) for _ in range(rng.randrange(1, 6))]
            ys = [rng.choice(states) for _ in range(rng.randrange(1, 6))]
            got = dtw_state_lists(xs, ys, metric_name)
            assert got == pytest.approx(brute_force_dtw(xs, ys, metric_fn), abs=1e-12)


def test_normalized_divides_by_path_cells():
    # [A,B] vs [B,A]: optimal path is the diagonal (2 cells, cost 2) -> 1.0
    assert dtw_state_lists([A, B], [B, A], "discrete", normalized=True) == 1.0
    # identical pair: diagonal of 2 cells, cost 0
    assert dtw_state_lists([A, B], [A, B], "discrete", normalized=True) == 0.0


# -- distance matrix --------------------------------------------------------------

def test_matrix_identical_pair_all_zero():
    m = distance_matrix([seq("x", "A", "B"), seq("y", "A", "B")], "discrete")
    assert m.values == [[0.0, 0.0], [0.0, 0.0]]


def test_matrix_three_sequences_match_per_pair_oracle():
    seqs = [seq("x", "A", "B"), seq("y", "B", "A"), seq("z", "A", "B", "C")]
    m = distance_matrix(seqs, "discrete")
    lists = [[A, B], [B, A], [A, B, C]]
    for i in range(3):
        for j in range(3):
            expected = 0.0 if i == j else brute_force_dtw(lists[i], lists[j],
                                                          discrete_distance)
            assert m.values[i][j] == pytest.approx(expected, abs=1e-12)
    assert m.values == [[0.0, 2.0, 1.0], [2.0, 0.0, 2.0], [1.0, 2.0, 0.0]]


def test_matrix_symmetric_zero_diagonal():
    rng = random.Random(23)
    seqs = [seq(f"o{i}", *[rng.choice("ABC") for _ in range(rng.randrange(1, 5))])
            for i in range(5)]
    m = distance_matrix(seqs, "jaccard")
    arr = m.as_array()
    assert np.array_equal(arr, arr.T)
    assert np.all(np.diag(arr) == 0.0)


def test_matrix_needs_two_sequences():
    with pytest.raises(DegenerateInputError):
        distance_matrix([seq("x", "A")], "discrete")


# -- clustering --------------------------------------------------------------------

def _matrix(owners, values) -> DistanceMatrix:
    return DistanceMatrix(owners=[Owner("player", o) for o in owners],
                          values=values)


def test_cluster_k_equals_owner_count_gives_singletons():
    m = _matrix("wxyz", [[0, 1, 2, 3], [1, 0, 4, 5], [2, 4, 0, 6], [3, 5, 6, 0]])
    got = cluster(m, 4)
    assert sorted(got.clusters().values()) == [["w"], ["x"], ["y"], ["z"]]


def test_cluster_k_one_gives_single_cluster():
    m = _matrix("wxy", [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    assert cluster(m, 1).clusters() == {0: ["w", "x", "y"]}


def test_cluster_recovers_two_blocks():
    # Hand-traced merges: (w,x) at 0.1, then (y,z) at 0.1, stop at k=2.
    m = _matrix("wxyz", [
        [0.0, 0.1, 1.0, 1.0],
        [0.1, 0.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 0.1],
        [1.0, 1.0, 0.1, 0.0],
    ])
    got = cluster(m, 2)
    assert got.clusters() == {0: ["w", "x"], 1: ["y", "z"]}


def test_cluster_k_too_large():
    m = _matrix("wx", [[0, 1], [1, 0]])
    with pytest.raises(ValidationError):
        cluster(m, 3)


def test_cluster_deterministic_across_runs():
    rng = random.Random(7)
    n = 8
    vals = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            vals[i][j] = vals[j][i] = round(rng.uniform(0.1, 2.0), 6)
    m = _matrix([f"o{i}" for i in range(n)], vals)
    first = cluster(m, 3).assignment
    for _ in range(5):
        assert cluster(m, 3).assignment == first


def test_cluster_tie_break_smallest_index_pair():
    # d(a,b) == d(c,d) == 0.5: the (a,b) merge must happen first; with k=3
    # only that merge runs.
    m = _matrix("abcd", [
        [0.0, 0.5, 2.0, 2.0],
        [0.5, 0.0, 2.0, 2.0],
        [2.0, 2.0, 0.0, 0.5],
        [2.0, 2.0, 0.5, 0.0],
    ])
    got = cluster(m, 3).clusters()
    assert got == {0: ["a", "b"], 1: ["c"], 2: ["d"]}


# -- embedding ---------------------------------------------------------------------

def test_embed_two_points_exact():
    m = _matrix("ab", [[0.0, 1.0], [1.0, 0.0]])
    emb = embed_2d(m, seed=1)
    d = math.dist(emb.position_of("a"), emb.position_of("b"))
    assert abs(d - 1.0) < 1e-6
    assert emb.final_stress < 1e-9


def test_embed_equilateral_triangle():
    m = _matrix("abc", [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    emb = embed_2d(m, seed=3, max_iterations=2000, stress_tolerance=1e-14)
    for x, y in (("a", "b"), ("a", "c"), ("b", "c")):
        d = math.dist(emb.position_of(x), emb.position_of(y))
        assert abs(d - 1.0) < 1e-3


def test_embed_non_euclidean_has_positive_monotone_stress():
    # Four mutually unit-distant points do not fit in the plane.
    vals = [[0.0 if i == j else 1.0 for j in range(4)] for i in range(4)]
    m = _matrix("abcd", vals)
    emb = embed_2d(m, seed=5)
    assert emb.final_stress > 0.0
    trace = emb.stress_trace
    assert all(trace[i + 1] <= trace[i] + 1e-12 for i in range(len(trace) - 1))


def test_embed_reproducible_for_same_seed():
    rng = random.Random(31)
    n = 6
    vals = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            vals[i][j] = vals[j][i] = rng.uniform(0.2, 3.0)
    m = _matrix([f"o{i}" for i in range(n)], vals)
    e1 = embed_2d(m, seed=42)
    e2 = embed_2d(m, seed=42)
    assert np.max(np.abs(e1.coordinates - e2.coordinates)) <= 1e-12
    e3 = embed_2d(m, seed=43)
    assert np.max(np.abs(e1.coordinates - e3.coordinates)) > 1e-9


def test_embed_degenerate_all_zero_matrix():
    m = _matrix("abc", [[0.0] * 3 for _ in range(3)])
    emb = embed_2d(m, seed=9)
    assert emb.final_stress == 0.0
    assert np.all(emb.coordinates == 0.0)


def test_raw_stress_zero_for_perfect_layout():
    coords = np.array([[0.0, 0.0], [1.0, 0.0]])
    targets = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert raw_stress(coords, targets) == 0.0
