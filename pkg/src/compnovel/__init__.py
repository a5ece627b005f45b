"""Evolutionary discovery of minimal sorting networks.

Four selection methods are provided: a single hierarchical objective,
plain multi-objective (NSGA-II style truncation), composite
multi-objective, and composite multi-objective with novelty selection.
"""

from compnovel.network import (
    Comparator,
    Evaluation,
    Network,
    canonicalize,
    evaluate,
    parse_network,
    serialize_network,
)
from compnovel.engine import MethodKind, RunConfig, RunResult, run

__all__ = [
    "Comparator",
    "Evaluation",
    "Network",
    "canonicalize",
    "evaluate",
    "parse_network",
    "serialize_network",
    "MethodKind",
    "RunConfig",
    "RunResult",
    "run",
]

__version__ = "0.1.0"
