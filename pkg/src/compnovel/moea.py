"""Pareto machinery: dominance, non-dominated sorting, crowding, truncation.

Selection for the multi-objective methods is elitist truncation: the
population is ordered by (front rank, crowding distance descending,
stable id) and the top fraction becomes the parent pool.  The sort is
vectorized; populations of ~1000 are sorted each generation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

Vector = Sequence[float]


@dataclass(frozen=True, slots=True)
class RankedIndividual:
    id: int
    objectives: tuple[float, ...]
    rank: int
    crowding: float


def dominates(a: Vector, b: Vector) -> bool:
    """Minimization dominance: a no worse everywhere, better somewhere."""
    if len(a) != len(b):
        raise ValueError(f"objective length mismatch: {len(a)} vs {len(b)}")
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_nondominated_sort(points: Sequence[Vector]) -> list[list[int]]:
    """Partition indices into fronts (front 0 = non-dominated)."""
    if len(points) == 0:
        raise ValueError("population is empty")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    le = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    lt = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    n_dom = dom.sum(axis=0)

    fronts: list[list[int]] = []
    assigned = np.zeros(n, dtype=bool)
    current = np.flatnonzero((n_dom == 0) & ~assigned)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        n_dom = n_dom - dom[current].sum(axis=0)
        current = np.flatnonzero((n_dom == 0) & ~assigned)
    return fronts


def crowding_distance(front: Sequence[Vector]) -> list[float]:
    """NSGA-II crowding: boundary points infinite, interior points sum
    normalized gaps per objective; constant objectives contribute 0."""
    if len(front) == 0:
        raise ValueError("front is empty")
    pts = np.asarray(front, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, k = pts.shape
    dist = np.zeros(n)
    for m in range(k):
        order = np.argsort(pts[:, m], kind="stable")
        vals = pts[order, m]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0 and n > 2:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist.tolist()


def rank_population(points: Sequence[Vector], ids: Sequence[int] | None = None) -> list[RankedIndividual]:
    """Assign front rank and crowding distance to every point."""
    if ids is None:
        ids = list(range(len(points)))
    fronts = fast_nondominated_sort(points)
    ranked: list[RankedIndividual | None] = [None] * len(points)
    for rank, front in enumerate(fronts):
        dists = crowding_distance([points[i] for i in front])
        for i, d in zip(front, dists):
            ranked[i] = RankedIndividual(ids[i], tuple(points[i]), rank, d)
    return ranked  # type: ignore[return-value]


def selection_order(ranked: Sequence[RankedIndividual]) -> list[RankedIndividual]:
    """Order by (rank ascending, crowding descending, id ascending)."""
    return sorted(ranked, key=lambda r: (r.rank, -r.crowding, r.id))


def truncation_select(ranked: Sequence[RankedIndividual], k: int) -> list[RankedIndividual]:
    """Elitist truncation: top k of the selection order."""
    if k > len(ranked):
        raise ValueError(f"cannot select {k} from population of {len(ranked)}")
    return selection_order(ranked)[:k]
