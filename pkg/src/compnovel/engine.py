"""Generation loop: evaluate, select per method, breed, repeat.

Elitist (mu+lambda) structure: each generation the top-ranked elite pool
survives unchanged and offspring fill the population back up.  Under
novelty selection the breeding pool is re-picked for behavioral novelty
while survival stays rank-based, so exploration cannot erode the
population's best solutions.  Runs are
fully deterministic given the config seed; offspring genomes come from
per-offspring RNG substreams so evaluation may be parallelized without
changing results.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from compnovel import genetics, moea, novelty, objectives
from compnovel.genetics import ConfigError, VariationParams
from compnovel.network import Evaluation, Network, evaluate
from compnovel.novelty import NoveltyConfig, round_half_up
from compnovel.objectives import CompositeWeights, single_fitness


class MethodKind(str, Enum):
    SINGLE = "so"
    MULTI = "mo"
    COMPOSITE = "cmo"
    COMPOSITE_NOVELTY = "cmo-novelty"


@dataclass(frozen=True, slots=True)
class RunConfig:
    method: MethodKind
    lines: int
    population_size: int = 1000
    generations: int = 1000
    elite_fraction: float = 0.10
    seed: int = 0
    variation: Optional[VariationParams] = None
    weights: CompositeWeights = CompositeWeights()
    novelty: NoveltyConfig = NoveltyConfig()

    def __post_init__(self):
        if not 2 <= self.lines <= 32:
            raise ConfigError(f"lines must be in [2, 32], got {self.lines}")
        if self.population_size < 10:
            raise ConfigError(f"population_size must be >= 10, got {self.population_size}")
        if self.generations < 1:
            raise ConfigError(f"generations must be >= 1, got {self.generations}")
        if not 0 < self.elite_fraction <= 0.5:
            raise ConfigError(f"elite_fraction must be in (0, 0.5], got {self.elite_fraction}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit value, got {self.seed}")
        if self.method == MethodKind.COMPOSITE_NOVELTY:
            if self.elite_fraction * self.novelty.selection_multiplier > 1.0 + 1e-12:
                raise ConfigError(
                    "selection_multiplier too large: elite_fraction * "
                    "selection_multiplier must be <= 1"
                )
            broad = round_half_up(self.elite_count() * self.novelty.selection_multiplier)
            if broad > self.population_size:
                raise ConfigError(
                    f"selection_multiplier: broadened pool {broad} exceeds "
                    f"population_size {self.population_size}"
                )

    def resolved_variation(self) -> VariationParams:
        return self.variation if self.variation is not None else genetics.default_params(self.lines)

    def elite_count(self) -> int:
        return max(1, round_half_up(self.elite_fraction * self.population_size))


@dataclass(frozen=True, slots=True)
class Individual:
    id: int
    genome: Network
    eval: Evaluation
    objectives: tuple[float, ...]

    @property
    def fitness(self) -> int:
        return single_fitness(self.eval.mistakes, self.eval.layers, self.eval.comparators)


@dataclass(frozen=True, slots=True)
class GenerationRecord:
    generation: int
    best_fitness: int
    min_mistakes: int
    best_c_correct: Optional[int]
    best_l_correct: Optional[int]
    elite_diversity: float


@dataclass(slots=True)
class RunResult:
    config: RunConfig
    records: list[GenerationRecord]
    best_c_individual: Optional[Individual]
    best_l_individual: Optional[Individual]
    generations_to_first_correct: Optional[int]
    final_population: list[Individual]
    wall_clock_seconds: float


def derive_rng(seed: int, *tags) -> random.Random:
    """Deterministic RNG substream keyed by seed plus arbitrary tags."""
    label = ":".join([str(seed), *map(str, tags)]).encode()
    digest = hashlib.blake2b(label, digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _objective_map(config: RunConfig) -> Callable[[Evaluation], tuple[float, ...]]:
    if config.method == MethodKind.SINGLE:
        return lambda ev: (float(single_fitness(ev.mistakes, ev.layers, ev.comparators)),)
    if config.method == MethodKind.MULTI:
        return lambda ev: objectives.raw_objectives(ev.mistakes, ev.layers, ev.comparators)
    weights = config.weights
    return lambda ev: objectives.composite_objectives(
        ev.mistakes, ev.layers, ev.comparators, weights
    )


class _EvalContext:
    """Memoizing evaluator with optional process-pool parallelism.

    Results are independent of worker count: evaluation is a pure
    function of the genome and batch order is preserved.
    """

    def __init__(self, workers: int = 1):
        self.cache: dict[tuple, Evaluation] = {}
        self.pool = None
        if workers > 1:
            import multiprocessing

            self.pool = multiprocessing.get_context("fork").Pool(workers)

    def close(self):
        if self.pool is not None:
            self.pool.close()
            self.pool.join()
            self.pool = None

    def evaluate_batch(self, genomes: Sequence[Network]) -> list[Evaluation]:
        missing: dict[tuple, Network] = {}
        for net in genomes:
            key = net.comparators
            if key not in self.cache and key not in missing:
                missing[key] = net
        if missing:
            nets = list(missing.values())
            if self.pool is not None:
                results = self.pool.map(evaluate, nets)
            else:
                results = [evaluate(net) for net in nets]
            for net, ev in zip(nets, results):
                self.cache[net.comparators] = ev
        return [self.cache[net.comparators] for net in genomes]


@dataclass(slots=True)
class _RunState:
    population: list[Individual]
    next_id: int
    best_c: Optional[Individual] = None
    best_l: Optional[Individual] = None
    first_correct_gen: Optional[int] = None


def _update_best_correct(state: _RunState, individuals: Sequence[Individual], gen: int):
    for ind in individuals:
        if ind.eval.mistakes != 0:
            continue
        if state.first_correct_gen is None:
            state.first_correct_gen = gen
        ev = ind.eval
        bc = state.best_c
        if bc is None or (ev.comparators, ev.layers, ind.id) < (
            bc.eval.comparators, bc.eval.layers, bc.id
        ):
            state.best_c = ind
        bl = state.best_l
        if bl is None or (ev.layers, ev.comparators, ind.id) < (
            bl.eval.layers, bl.eval.comparators, bl.id
        ):
            state.best_l = ind


def best_correct(
    individuals: Sequence[Individual],
) -> tuple[Optional[Individual], Optional[Individual]]:
    """Best correct members: (min comparators, min layers); absent if none."""
    correct = [ind for ind in individuals if ind.eval.mistakes == 0]
    if not correct:
        return None, None
    by_c = min(correct, key=lambda i: (i.eval.comparators, i.eval.layers, i.id))
    by_l = min(correct, key=lambda i: (i.eval.layers, i.eval.comparators, i.id))
    return by_c, by_l


def select_pools(
    population: Sequence[Individual], config: RunConfig
) -> tuple[list[Individual], list[Individual]]:
    """(survivors, parents), each of size elite_count.

    Survivors are always the top elites by the method's rank order, so
    population quality never erodes.  Parents equal the survivors except
    under novelty selection, where novelty re-picks who breeds from the
    broadened rank order; with multiplier 1 the two coincide again.
    """
    elite = config.elite_count()
    if config.method == MethodKind.SINGLE:
        order = sorted(population, key=lambda ind: (ind.objectives[0], ind.id))
    else:
        ranked = moea.rank_population(
            [ind.objectives for ind in population], [ind.id for ind in population]
        )
        by_id = {ind.id: ind for ind in population}
        order = [by_id[r.id] for r in moea.selection_order(ranked)]
    survivors = order[:elite]
    if config.method == MethodKind.COMPOSITE_NOVELTY:
        chosen = novelty.novelty_select(
            [(ind.id, ind.eval.behavior) for ind in order], elite, config.novelty
        )
        parents = [order[p] for p in chosen]
    else:
        parents = survivors

    # Keep the incumbent best alive and breeding so the population's best
    # fitness never regresses, whatever the selection order preferred.
    best = min(population, key=lambda ind: (ind.fitness, ind.id))
    for pool in ([survivors] if parents is survivors else [survivors, parents]):
        if all(ind.id != best.id for ind in pool):
            pool[-1] = best
    return survivors, parents


def _elite_diversity(pool: Sequence[Individual], metric: str) -> float:
    if len(pool) < 2:
        return 0.0
    dmat = novelty.distance_matrix([ind.eval.behavior for ind in pool], metric)
    n = len(pool)
    return float(dmat.sum() / (n * (n - 1)))


def step_generation(
    state: _RunState, config: RunConfig, gen: int, ctx: _EvalContext
) -> GenerationRecord:
    survivors, parents = select_pools(state.population, config)
    params = config.resolved_variation()
    obj_map = _objective_map(config)

    genomes = [ind.genome for ind in parents]
    n_offspring = config.population_size - len(survivors)
    children = [
        genetics.make_offspring(genomes, params, derive_rng(config.seed, gen, i))
        for i in range(n_offspring)
    ]
    evals = ctx.evaluate_batch(children)
    offspring = [
        Individual(state.next_id + i, net, ev, obj_map(ev))
        for i, (net, ev) in enumerate(zip(children, evals))
    ]
    state.next_id += n_offspring
    state.population = survivors + offspring
    _update_best_correct(state, offspring, gen)

    pop = state.population
    best_fit = min(ind.fitness for ind in pop)
    min_m = min(ind.eval.mistakes for ind in pop)
    by_c, by_l = best_correct(pop)
    return GenerationRecord(
        generation=gen,
        best_fitness=best_fit,
        min_mistakes=min_m,
        best_c_correct=by_c.eval.comparators if by_c else None,
        best_l_correct=by_l.eval.layers if by_l else None,
        elite_diversity=_elite_diversity(parents, config.novelty.distance_metric),
    )


def run(config: RunConfig, workers: int = 1) -> RunResult:
    """Execute a full evolutionary run; deterministic in config + seed."""
    start = time.perf_counter()
    params = config.resolved_variation()
    obj_map = _objective_map(config)
    ctx = _EvalContext(workers)
    try:
        genomes = [
            genetics.random_network(config.lines, params, derive_rng(config.seed, "init", i))
            for i in range(config.population_size)
        ]
        evals = ctx.evaluate_batch(genomes)
        population = [
            Individual(i, net, ev, obj_map(ev))
            for i, (net, ev) in enumerate(zip(genomes, evals))
        ]
        state = _RunState(population=population, next_id=config.population_size)
        _update_best_correct(state, population, 0)

        records = [
            step_generation(state, config, gen, ctx)
            for gen in range(1, config.generations + 1)
        ]
    finally:
        ctx.close()

    return RunResult(
        config=config,
        records=records,
        best_c_individual=state.best_c,
        best_l_individual=state.best_l,
        generations_to_first_correct=state.first_correct_gen,
        final_population=state.population,
        wall_clock_seconds=time.perf_counter() - start,
    )
