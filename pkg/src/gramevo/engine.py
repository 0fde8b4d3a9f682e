"""The evolutionary search: evaluation with caching, the step, the loop.

A :class:`Run` bundles everything one search needs (grammar, problem,
representation, cache and the single seeded random stream). ``step`` and
``search_loop`` are plain functions of a run, so alternative steps or loops
can be passed in without touching this module.

All random draws happen on the run's stream, in a fixed serial order.
Fitness evaluation never touches it, which is what makes concurrent
evaluation safe for reproducibility.
"""

from __future__ import annotations

import logging
import math
import random
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import ConfigurationError, EmptyCandidatePool, FitnessError
from .grammar import GrammarContext, load_grammar
from .individual import WORST, Individual, Representation, best_of, rank_key
from .operators import (
    crossover_linear,
    crossover_subtree,
    init_random_genome,
    init_tree_based,
    mutate_codon_flip,
    mutate_genome_flip,
    mutate_subtree,
    replace_generational,
    replace_steady_state,
    select_tournament,
    select_truncation,
)
from .operators.crossover import fresh_copy
from .params import Parameters
from .problems import Problem, load_dataset, make_problem

log = logging.getLogger(__name__)


class FitnessCache:
    """Phenotype -> fitness memo with hit/miss accounting.

    Policy ``lookup`` reuses stored values; ``off`` stores nothing and every
    individual is evaluated.
    """

    def __init__(self, policy: str = "lookup"):
        if policy not in ("lookup", "off"):
            raise ValueError(f"unknown cache policy {policy!r}")
        self.policy = policy
        self.store: dict[str, object] = {}
        self.hits = 0
        self.misses = 0

    @property
    def enabled(self) -> bool:
        return self.policy == "lookup"

    def __contains__(self, phenotype):
        return self.enabled and phenotype in self.store

    def __len__(self):
        return len(self.store)


def safe_fitness(fitness_fn, phenotype):
    """Call ``fitness_fn``; failures and non-finite results become WORST."""
    try:
        value = fitness_fn(phenotype)
    except (FitnessError, ArithmeticError, ValueError, RecursionError) as exc:
        log.debug("fitness failed for %r: %s", phenotype, exc)
        return WORST
    if value is WORST or not math.isfinite(value):
        return WORST
    return float(value)


def evaluate(individuals, fitness_fn, cache: FitnessCache | None = None, workers: int = 1):
    """Assign fitness to every individual in place and return the list.

    Invalids get WORST without a call. Under a ``lookup`` cache each distinct
    phenotype is evaluated at most once per run. Returns the individuals;
    the number of fitness calls made is added to ``cache.misses``.
    """
    if cache is None:
        cache = FitnessCache("off")
    jobs: list[tuple[str, list[Individual]]] = []
    pending: dict[str, list[Individual]] = {}
    for ind in individuals:
        if ind.invalid:
            ind.fitness = WORST
        elif ind.phenotype in cache:
            ind.fitness = cache.store[ind.phenotype]
            cache.hits += 1
        elif cache.enabled:
            if ind.phenotype in pending:
                pending[ind.phenotype].append(ind)
                cache.hits += 1
            else:
                pending[ind.phenotype] = [ind]
                jobs.append((ind.phenotype, pending[ind.phenotype]))
        else:
            jobs.append((ind.phenotype, [ind]))

    phenotypes = [p for p, _ in jobs]
    if workers > 1 and len(phenotypes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: safe_fitness(fitness_fn, p), phenotypes))
    else:
        results = [safe_fitness(fitness_fn, p) for p in phenotypes]

    cache.misses += len(jobs)
    for (phenotype, group), fitness in zip(jobs, results):
        if cache.enabled:
            cache.store[phenotype] = fitness
        for ind in group:
            ind.fitness = fitness
    return individuals


@dataclass
class GenerationStats:
    """One row of the run's statistics table.

    ``offspring`` counts individuals sent for evaluation so far (the search
    budget); ``evaluations`` counts actual fitness-function calls, which
    excludes invalids and cache hits.
    """

    generation: int
    offspring: int
    evaluations: int
    best_fitness: object
    mean_fitness: float
    median_fitness: float
    best_phenotype: str | None
    invalids: int
    cache_hits: int
    mean_used_codons: float
    mean_depth: float
    mean_nodes: float
    elapsed: float = 0.0

    # wall-clock time is excluded so the table is reproducible byte for byte
    COLUMNS = ("generation", "offspring", "evaluations", "best_fitness", "mean_fitness",
               "median_fitness", "invalids", "cache_hits", "mean_used_codons", "mean_depth", "mean_nodes",
               "best_phenotype")

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in self.COLUMNS]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _mean(values):
    return statistics.fmean(values) if values else math.nan


class Run:
    """State of one search: parameters, grammar, problem, random stream, cache."""

    def __init__(self, params: Parameters, problem: Problem | None = None):
        params = params.resolved().validate()
        self.params = params
        self.rng = random.Random(params.random_seed)
        self.dataset = None
        if problem is None:
            if params.dataset is not None and params.problem in ("regression", "classification"):
                self.dataset = load_dataset(params.dataset)
            problem = make_problem(params.problem, self.dataset, params.target, params.error_metric)
        else:
            self.dataset = getattr(problem, "dataset", None)
        self.problem = problem
        context = GrammarContext(self.dataset.n_vars if self.dataset is not None else None)
        self.grammar = load_grammar(params.grammar_file, context)
        self.maximise = params.maximise
        uses_trees = "subtree" in (params.crossover, params.mutation)
        self.rep = Representation(
            self.grammar,
            codon_size=params.codon_size,
            max_wraps=params.max_wraps,
            max_tree_depth=params.max_tree_depth,
            mapping_depth_limit=params.mapping_depth_limit,
            keep_trees=uses_trees,
        )
        self.cache = FitnessCache(params.cache)
        self.generation_size = params.population_size - params.elite_size
        # individuals submitted for evaluation, invalids and cache hits included
        self.offspring = 0
        self.best: Individual | None = None
        if params.initialisation != "random_genome":
            self.init_depths()
        self.started = time.perf_counter()

    @property
    def evaluations(self) -> int:
        """Fitness-function calls made so far."""
        return self.cache.misses

    # -- building blocks -----------------------------------------------------

    def init_depths(self):
        p = self.params
        low = p.min_init_depth or self.grammar.rules[self.grammar.start].min_depth
        if low > p.max_init_depth:
            raise ConfigurationError(
                "max_init_depth", f"grammar needs at least depth {low}, got {p.max_init_depth}"
            )
        return range(low, p.max_init_depth + 1)

    def initialise(self) -> list[Individual]:
        p = self.params
        if p.initialisation == "random_genome":
            pop = init_random_genome(p.population_size, p.genome_length, self.rep, self.rng)
        else:
            method = "random_grow" if p.initialisation == "random_tree" else p.initialisation
            pop = init_tree_based(p.population_size, self.init_depths(), method, self.rep, self.rng)
        return self.evaluate(pop)

    def evaluate(self, individuals):
        self.offspring += len(individuals)
        evaluate(individuals, self.problem, self.cache, self.params.workers)
        for ind in individuals:
            if ind.fitness is not WORST and (
                    self.best is None or rank_key(self.maximise)(ind) < rank_key(self.maximise)(self.best)):
                self.best = ind
        return individuals

    def select(self, population, count):
        p = self.params
        if p.selection == "truncation":
            pool = population if p.allow_invalid_selection else [i for i in population if not i.invalid]
            if not pool:
                raise EmptyCandidatePool("no valid individuals to select from")
            return select_truncation(pool, p.truncation_proportion, self.maximise)
        return select_tournament(population, count, p.tournament_size, self.rng,
                                 p.allow_invalid_selection, self.maximise)

    def crossover(self, a, b):
        p = self.params
        if self.rng.random() >= p.crossover_probability:
            return fresh_copy(a), fresh_copy(b)
        if p.crossover == "subtree":
            return crossover_subtree(a, b, self.rep, self.rng)
        return crossover_linear(a, b, p.crossover, self.rep, self.rng, p.within_used)

    def mutate(self, ind):
        p = self.params
        if p.mutation == "subtree":
            return mutate_subtree(ind, self.rep, self.rng)
        if p.mutation == "genome_flip":
            return mutate_genome_flip(ind, p.mutation_events, self.rep, self.rng, p.within_used)
        rate = p.mutation_probability
        if rate is None:
            rate = 1.0 / max(1, min(ind.used_codons, len(ind.genome)))
        return mutate_codon_flip(ind, rate, self.rep, self.rng, p.within_used)

    def pair(self, parents):
        if len(parents) < 2:
            return parents[0], parents[0]
        a, b = self.rng.sample(parents, 2)
        return a, b

    def stats(self, generation, population) -> GenerationStats:
        valid = [i for i in population if i.fitness is not WORST]
        fits = [i.fitness for i in valid]
        best = best_of(population, self.maximise)
        return GenerationStats(
            generation=generation,
            offspring=self.offspring,
            evaluations=self.evaluations,
            best_fitness=best.fitness,
            mean_fitness=_mean(fits),
            median_fitness=statistics.median(fits) if fits else math.nan,
            best_phenotype=best.phenotype,
            invalids=sum(1 for i in population if i.invalid),
            cache_hits=self.cache.hits,
            mean_used_codons=_mean([i.used_codons for i in valid]),
            mean_depth=_mean([i.depth for i in valid if i.depth is not None]),
            mean_nodes=_mean([i.nodes for i in valid if i.nodes is not None]),
            elapsed=time.perf_counter() - self.started,
        )


def _select_with_fallback(run, population, count):
    try:
        return run.select(population, count)
    except EmptyCandidatePool:
        log.warning("every individual is invalid; selecting among invalids")
        return select_tournament(population, count, run.params.tournament_size, run.rng,
                                 True, run.maximise)


def step(population, run: Run):
    """One generation: select, cross over pairs, mutate every child, evaluate, replace.

    Under steady-state replacement a step instead breeds and evaluates two
    children that displace the two worst members.
    """
    if run.params.replacement == "steady_state":
        parents = _select_with_fallback(run, population, 2)
        a, b = run.pair(parents)
        children = [run.mutate(c) for c in run.crossover(a, b)]
        run.evaluate(children)
        return replace_steady_state(population, children, run.maximise)

    size = run.generation_size
    parents = _select_with_fallback(run, population, size)
    children = []
    while len(children) < size:
        children.extend(run.crossover(*run.pair(parents)))
    children = [run.mutate(c) for c in children[:size]]
    run.evaluate(children)
    return replace_generational(population, children, run.params.elite_size, run.maximise)


def search_loop(params: Parameters, step=step, run: Run | None = None, on_generation=None):
    """Initialise, then apply ``step`` for the configured number of generations.

    Returns ``(best individual ever seen, per-generation stats)``; the stats
    have ``generations + 1`` records, generation 0 being the initial
    population. Steady-state runs record a generation every time they have
    bred as many children as a generational run would.
    """
    run = run or Run(params)
    population = run.initialise()
    history = [run.stats(0, population)]
    if on_generation:
        on_generation(history[-1])
    steps = 1
    if run.params.replacement == "steady_state":
        steps = math.ceil(run.generation_size / 2)
    for gen in range(1, run.params.generations + 1):
        for _ in range(steps):
            population = step(population, run)
        history.append(run.stats(gen, population))
        if on_generation:
            on_generation(history[-1])
    best = run.best if run.best is not None else best_of(population, run.maximise)
    return best, history
