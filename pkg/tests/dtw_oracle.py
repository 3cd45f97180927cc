"""Independent DTW oracle: explicit enumeration of monotone warping paths.

Kept separate from the library on purpose — tests compare the production
dynamic program against a minimum over literally enumerated paths.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def warping_paths(n: int, m: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """All monotone paths of (i, j) cells from (0, 0) to (n-1, m-1) using
    steps (1,0), (0,1), (1,1)."""
    paths: list[tuple[tuple[int, int], ...]] = []

    def rec(i: int, j: int, acc: list[tuple[int, int]]):
        if i == n - 1 and j == m - 1:
            paths.append(tuple(acc))
            return
        if i + 1 < n:
            rec(i + 1, j, acc + [(i + 1, j)])
        if j + 1 < m:
            rec(i, j + 1, acc + [(i, j + 1)])
        if i + 1 < n and j + 1 < m:
            rec(i + 1, j + 1, acc + [(i + 1, j + 1)])

    rec(0, 0, [(0, 0)])
    return tuple(paths)


def brute_force_dtw(a, b, metric_fn) -> float:
    """Minimum cumulative cost over every enumerated warping path."""
    best = float("inf")
    for path in warping_paths(len(a), len(b)):
        cost = sum(metric_fn(a[i], b[j]) for i, j in path)
        best = min(best, cost)
    return best


@lru_cache(maxsize=None)
def path_matrix(n: int, m: int) -> np.ndarray:
    """One-hot (num_paths, n*m) matrix of the enumerated paths, so batched
    path costs are a single matmul: costs = local_costs @ path_matrix.T."""
    paths = warping_paths(n, m)
    mat = np.zeros((len(paths), n * m))
    for r, path in enumerate(paths):
        for i, j in path:
            mat[r, i * m + j] = 1.0
    return mat


def batched_oracle(local_costs: np.ndarray, n: int, m: int) -> np.ndarray:
    """Oracle DTW for a batch of local-cost matrices, shape (B, n*m)."""
    return (local_costs @ path_matrix(n, m).T).min(axis=1)
