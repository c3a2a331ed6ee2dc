"""Dynamic time warping over RRV sequences and 1-NN classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..descriptor import pairwise_distances
from ..errors import EmptySequence, EmptyTrainingSet, StructureMismatch


@dataclass(frozen=True)
class DtwResult:
    cost: float
    path: list | None = None


@njit(cache=True, nogil=True)
def _accumulate(d, window):
    n, m = d.shape
    acc = np.full((n, m), np.inf)
    for i in range(n):
        lo, hi = 0, m
        if window >= 0:
            lo = max(0, i - window)
            hi = min(m, i + window + 1)
        for j in range(lo, hi):
            if i == 0 and j == 0:
                acc[i, j] = d[i, j]
                continue
            best = np.inf
            if i > 0:
                best = acc[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
            if i > 0 and j > 0 and acc[i - 1, j - 1] < best:
                best = acc[i - 1, j - 1]
            acc[i, j] = d[i, j] + best
    return acc


def accumulated_cost(d, window: int | None = None) -> np.ndarray:
    """Cumulative cost matrix ``D(p,q) = d(p,q) + min(D(p-1,q), D(p,q-1), D(p-1,q-1))``.

    ``window`` is an optional Sakoe-Chiba half width; ``None`` leaves the
    recurrence unconstrained.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    if d.ndim != 2 or d.size == 0:
        raise EmptySequence("empty distance matrix")
    if window is not None:
        window = max(int(window), abs(d.shape[0] - d.shape[1]))
    return _accumulate(d, -1 if window is None else window)


def _backtrack(acc: np.ndarray) -> list:
    i, j = acc.shape[0] - 1, acc.shape[1] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            steps = ((i - 1, j - 1), (i - 1, j), (i, j - 1))
            i, j = min(steps, key=lambda ij: acc[ij])
        path.append((i, j))
    return path[::-1]


def dtw_from_costs(d, return_path: bool = False, window: int | None = None) -> DtwResult:
    acc = accumulated_cost(d, window)
    return DtwResult(float(acc[-1, -1]), _backtrack(acc) if return_path else None)


def dtw(a, b, metric: str = "rrv", return_path: bool = False, window: int | None = None) -> DtwResult:
    """Warp two ``(T, 7k)`` descriptor sequences; the cost sits in ``D[-1, -1]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise EmptySequence("cannot warp an empty sequence")
    if a.shape[1:] != b.shape[1:]:
        raise StructureMismatch(f"descriptor widths {a.shape[1:]} and {b.shape[1:]} differ")
    return dtw_from_costs(pairwise_distances(a, b, metric), return_path, window)


def part_dtw_cost(p, q, metric: str = "rrv", symmetric: bool = True, window: int | None = None) -> float:
    """Per-part warping cost between skeleton descriptors.

    Each part is warped on its own and the costs are summed. With
    ``symmetric`` the same sum is also formed against the mirrored ``q``
    (left and right limbs swapped and reflected) and the smaller total wins.
    """
    if list(p.parts) != list(q.parts):
        raise StructureMismatch(f"parts {list(p.parts)} vs {list(q.parts)}")

    def total(other):
        return sum(dtw(p.parts[k], other.parts[k], metric, window=window).cost for k in p.parts)

    cost = total(q)
    if symmetric:
        cost = min(cost, total(q.mirrored()))
    return float(cost)


def nearest_neighbor(test, train_items, cost_fn) -> tuple[int, float]:
    """Index and cost of the cheapest training item; ties go to the lowest index."""
    best_i, best = -1, np.inf
    for i, item in enumerate(train_items):
        c = cost_fn(test, item)
        if c < best:
            best_i, best = i, c
    if best_i < 0:
        if not len(train_items):
            raise EmptyTrainingSet("no training samples")
        best_i, best = 0, float("inf")
    return best_i, float(best)


def knn_classify_1(test, train_set, cost_fn):
    """Label of the 1-NN. ``train_set`` is a sequence of ``(item, label)``."""
    if not len(train_set):
        raise EmptyTrainingSet("no training samples")
    items = [item for item, _ in train_set]
    i, _ = nearest_neighbor(test, items, cost_fn)
    return train_set[i][1]
