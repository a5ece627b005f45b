"""Random genome initialization and variation operators.

Genomes are variable-length comparator sequences.  Mutation picks one of
add / remove / swap; crossover cuts both parents at independent points
so offspring length can drift.  Degenerate cases (empty genome, cap hit)
are no-ops so offspring production is total.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from compnovel.network import MAX_COMPARATORS, Comparator, Network


class ConfigError(ValueError):
    """Raised for invalid parameter values; message names the key."""


@dataclass(frozen=True, slots=True)
class VariationParams:
    crossover_prob: float = 1.0
    mutation_prob: float = 0.9
    init_min: int = 2
    init_max: int = 10
    max_comparators: int = MAX_COMPARATORS

    def __post_init__(self):
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigError(f"crossover_prob must be in [0, 1], got {self.crossover_prob}")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigError(f"mutation_prob must be in [0, 1], got {self.mutation_prob}")
        if not 0 < self.init_min <= self.init_max <= self.max_comparators <= MAX_COMPARATORS:
            raise ConfigError(
                "init_min/init_max/max_comparators must satisfy "
                f"0 < init_min <= init_max <= max_comparators <= {MAX_COMPARATORS}, "
                f"got {self.init_min}/{self.init_max}/{self.max_comparators}"
            )


def default_params(n: int) -> VariationParams:
    """Defaults: always cross over, mutate 90%, start with n..3n comparators."""
    return VariationParams(init_min=min(n, MAX_COMPARATORS), init_max=min(3 * n, MAX_COMPARATORS))


@lru_cache(maxsize=None)
def canonical_pairs(n: int) -> tuple[Comparator, ...]:
    """All n*(n-1)/2 canonical comparators for n lines."""
    return tuple(Comparator(i, j) for i in range(n - 1) for j in range(i + 1, n))


def random_network(n: int, params: VariationParams, rng: random.Random) -> Network:
    pairs = canonical_pairs(n)
    count = rng.randint(params.init_min, params.init_max)
    return Network(n, tuple(rng.choice(pairs) for _ in range(count)))


def mutate(net: Network, params: VariationParams, rng: random.Random) -> Network:
    """Apply one of add / remove / swap uniformly; returns a new Network."""
    comps = net.comparators
    op = rng.randrange(3)
    if op == 0:  # add
        if len(comps) >= params.max_comparators:
            return net
        pos = rng.randint(0, len(comps))
        new = rng.choice(canonical_pairs(net.lines))
        return Network(net.lines, comps[:pos] + (new,) + comps[pos:])
    if op == 1:  # remove
        if not comps:
            return net
        pos = rng.randrange(len(comps))
        return Network(net.lines, comps[:pos] + comps[pos + 1:])
    # swap positions of two distinct comparators
    if len(comps) < 2:
        return net
    i, j = rng.sample(range(len(comps)), 2)
    out = list(comps)
    out[i], out[j] = out[j], out[i]
    return Network(net.lines, tuple(out))


def crossover(
    parent_a: Network,
    parent_b: Network,
    rng: random.Random,
    max_comparators: int = MAX_COMPARATORS,
) -> Network:
    """Single-point crossover with independent cut points in each parent."""
    if parent_a.lines != parent_b.lines:
        raise ValueError(
            f"cannot cross networks with {parent_a.lines} and {parent_b.lines} lines"
        )
    i = rng.randint(0, len(parent_a.comparators))
    j = rng.randint(0, len(parent_b.comparators))
    child = parent_a.comparators[:i] + parent_b.comparators[j:]
    return Network(parent_a.lines, child[:max_comparators])


def make_offspring(
    parent_pool: Sequence[Network], params: VariationParams, rng: random.Random
) -> Network:
    """Draw two parents with replacement, then crossover and mutate by rate."""
    if not parent_pool:
        raise ValueError("parent pool is empty")
    a = parent_pool[rng.randrange(len(parent_pool))]
    b = parent_pool[rng.randrange(len(parent_pool))]
    if rng.random() < params.crossover_prob:
        child = crossover(a, b, rng, params.max_comparators)
    else:
        child = a
    if rng.random() < params.mutation_prob:
        child = mutate(child, params, rng)
    return child
