"""Novelty scoring over behavior vectors and two-stage novelty selection.

The base method's selection order is broadened by a multiplier, the
broadened pool is re-ranked by novelty (sum of pairwise behavior
distances within the pool), and the leftover candidates are then folded
in one by one, each time evicting the pool member with the lowest
minimum novelty.  Multiplier 1 disables the whole mechanism; multiplier
1/elite_fraction turns selection into pure novelty search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True, slots=True)
class NoveltyConfig:
    selection_multiplier: float = 2.0
    distance_metric: str = "l1"

    def __post_init__(self):
        if self.selection_multiplier < 1.0:
            raise ValueError(
                f"selection_multiplier must be >= 1, got {self.selection_multiplier}"
            )
        if self.distance_metric not in ("l1", "l2"):
            raise ValueError(f"distance_metric must be 'l1' or 'l2', got {self.distance_metric!r}")


def behavior_distance(a: Sequence[float], b: Sequence[float], metric: str = "l1") -> float:
    if len(a) != len(b):
        raise ValueError(f"behavior length mismatch: {len(a)} vs {len(b)}")
    if metric == "l1":
        return float(sum(abs(x - y) for x, y in zip(a, b)))
    if metric == "l2":
        return float(sum((x - y) ** 2 for x, y in zip(a, b)) ** 0.5)
    raise ValueError(f"unknown metric {metric!r}")


def distance_matrix(behaviors: Sequence[Sequence[float]], metric: str = "l1") -> np.ndarray:
    pts = np.asarray(behaviors, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    if metric == "l1":
        return np.abs(diff).sum(axis=2)
    if metric == "l2":
        return np.sqrt((diff ** 2).sum(axis=2))
    raise ValueError(f"unknown metric {metric!r}")


def novelty_score(index: int, behaviors: Sequence[Sequence[float]], metric: str = "l1") -> float:
    """Sum of distances from member `index` to every other pool member."""
    if len(behaviors) < 2:
        raise ValueError("novelty needs a pool of at least 2")
    return float(
        sum(behavior_distance(behaviors[index], b, metric)
            for j, b in enumerate(behaviors) if j != index)
    )


def minimum_novelty(index: int, behaviors: Sequence[Sequence[float]], metric: str = "l1") -> float:
    """Distance from member `index` to its nearest other pool member."""
    if len(behaviors) < 2:
        raise ValueError("minimum novelty needs a pool of at least 2")
    return float(
        min(behavior_distance(behaviors[index], b, metric)
            for j, b in enumerate(behaviors) if j != index)
    )


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def novelty_select(
    candidates: Sequence[tuple[int, Sequence[float]]],
    elite_count: int,
    config: NoveltyConfig = NoveltyConfig(),
) -> list[int]:
    """Two-stage novelty selection over method-rank-ordered candidates.

    `candidates` are (id, behavior) pairs already ordered by the base
    method's selection order.  Returns the positions (indices into
    `candidates`) of the final pool, size exactly `elite_count`.
    """
    broad = round_half_up(elite_count * config.selection_multiplier)
    if len(candidates) < broad:
        raise ValueError(
            f"need at least {broad} candidates for elite_count={elite_count} "
            f"and multiplier={config.selection_multiplier}, got {len(candidates)}"
        )
    if broad <= elite_count:
        return list(range(elite_count))

    ids = [cid for cid, _ in candidates[:broad]]
    dmat = distance_matrix([b for _, b in candidates[:broad]], config.distance_metric)
    scores = dmat.sum(axis=1)

    # Stage 1: re-rank the broadened pool by novelty; ties keep method order.
    by_novelty = np.argsort(-scores, kind="stable")
    pool: list[int] = by_novelty[:elite_count].tolist()
    rest = by_novelty[elite_count:].tolist()

    # Stage 2: fold in the rest, evicting the least-isolated pool member.
    for cand in rest:
        pool.append(cand)
        sub = dmat[np.ix_(pool, pool)]
        np.fill_diagonal(sub, np.inf)
        min_nov = sub.min(axis=1)
        pool_scores = np.where(np.isinf(sub), 0.0, sub).sum(axis=1)
        # evict lowest minimum novelty; ties by lower within-pool score,
        # then by higher id
        evict_pos = min(
            range(len(pool)),
            key=lambda p: (min_nov[p], pool_scores[p], -ids[pool[p]]),
        )
        pool.pop(evict_pos)
    return pool
