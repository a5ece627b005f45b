"""Objective mappings for the four selection methods.

All methods minimize.  The single objective is strictly hierarchical in
(mistakes, layers, comparators) as long as layers and comparators stay
below 100.  The composite triple reuses that scalar as its first axis
and angles the other two so single-axis extremists fall off the front.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class CompositeWeights:
    alpha1: float = 1.0
    alpha2: float = 10.0
    alpha3: float = 1.0
    alpha4: float = 10.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3", "alpha4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def single_fitness(mistakes: int, layers: int, comparators: int) -> int:
    """Hierarchical scalar: 10000*m + 100*l + c."""
    return 10000 * mistakes + 100 * layers + comparators


def raw_objectives(mistakes: int, layers: int, comparators: int) -> tuple[float, float, float]:
    """The plain multi-objective triple [m, l, c]."""
    return (float(mistakes), float(layers), float(comparators))


def composite_objectives(
    mistakes: int, layers: int, comparators: int, weights: CompositeWeights = CompositeWeights()
) -> tuple[float, float, float]:
    """Composite triple: hierarchical scalar, layer-leaning axis, comparator-leaning axis."""
    return (
        float(single_fitness(mistakes, layers, comparators)),
        weights.alpha1 * mistakes + weights.alpha2 * layers,
        weights.alpha3 * mistakes + weights.alpha4 * comparators,
    )
