import math
import random

import pytest

from gramevo.engine import FitnessCache, Run, evaluate, safe_fitness, search_loop, step
from gramevo.errors import ConfigurationError, FitnessError
from gramevo.individual import WORST, Individual, Representation, fitness_key
from gramevo.params import Parameters

from conftest import EXPR, grammar, ind

QUICK = dict(population_size=40, generations=5)


class Counting:
    """A fitness function that records how often each phenotype was scored."""

    def __init__(self, fn=len):
        self.fn = fn
        self.calls = []

    def __call__(self, phenotype):
        self.calls.append(phenotype)
        return float(self.fn(phenotype))


def test_worst_sentinel_orders_last_both_ways():
    for maximise in (False, True):
        key = fitness_key(maximise)
        values = [WORST, 3.0, -1e300, 1e300, WORST]
        ordered = sorted(values, key=key)
        assert ordered[-2:] == [WORST, WORST]
    assert sorted([WORST, 2.0, 1.0], key=fitness_key(True))[0] == 2.0


def test_safe_fitness():
    def boom(_):
        raise FitnessError("nope")

    assert safe_fitness(boom, "x") is WORST
    assert safe_fitness(lambda _: math.inf, "x") is WORST
    assert safe_fitness(lambda _: math.nan, "x") is WORST
    assert safe_fitness(lambda _: 1 / 0, "x") is WORST
    assert safe_fitness(lambda _: 2, "x") == 2.0


def test_invalids_are_never_evaluated():
    fn = Counting()
    pop = [ind(None, invalid=True) for _ in range(5)]
    evaluate(pop, fn, FitnessCache())
    assert fn.calls == [] and all(i.fitness is WORST for i in pop)


def test_cache_calls_equal_distinct_phenotypes():
    fn = Counting()
    cache = FitnessCache("lookup")
    pop = [ind(None, p) for p in "aabbbcaa"]
    evaluate(pop, fn, cache)
    assert sorted(fn.calls) == ["a", "b", "c"]
    assert cache.misses == 3 and cache.hits == 5
    more = [ind(None, p) for p in "abd"]
    evaluate(more, fn, cache)
    assert sorted(fn.calls) == ["a", "b", "c", "d"]


def test_cache_off_evaluates_everything():
    fn = Counting()
    evaluate([ind(None, p) for p in "aab"], fn, FitnessCache("off"))
    assert fn.calls == ["a", "a", "b"]


def test_threaded_evaluation_matches_serial():
    phenotypes = [str(i % 7) * (i % 5 + 1) for i in range(60)]
    serial = [ind(None, p) for p in phenotypes]
    threaded = [ind(None, p) for p in phenotypes]
    evaluate(serial, Counting(), FitnessCache("off"))
    evaluate(threaded, Counting(), FitnessCache("off"), workers=4)
    assert [i.fitness for i in serial] == [i.fitness for i in threaded]


def test_unknown_cache_policy():
    with pytest.raises(ValueError):
        FitnessCache("novel")


def _string_params(**kw):
    return Parameters(**{"problem": "string_match", "random_seed": 1, **QUICK, **kw})


def test_history_length_and_generation_zero():
    best, history = search_loop(_string_params())
    assert [s.generation for s in history] == list(range(6))
    best0, history0 = search_loop(_string_params(generations=0))
    assert len(history0) == 1 and best0.fitness == history0[0].best_fitness


def test_same_seed_same_history():
    a = [s.row() for s in search_loop(_string_params(random_seed=5))[1]]
    b = [s.row() for s in search_loop(_string_params(random_seed=5))[1]]
    c = [s.row() for s in search_loop(_string_params(random_seed=6))[1]]
    assert a == b and a != c


def test_elitism_makes_best_monotone():
    for seed in range(5):
        _, history = search_loop(_string_params(random_seed=seed, generations=15))
        bests = [s.best_fitness for s in history]
        assert all(x >= y for x, y in zip(bests, bests[1:]))


def test_maximising_problem_is_monotone_upwards():
    params = Parameters(problem="program_max", random_seed=2, population_size=30, generations=6)
    _, history = search_loop(params)
    bests = [s.best_fitness for s in history]
    assert all(x <= y for x, y in zip(bests, bests[1:]))


def test_generational_evaluation_budget():
    params = _string_params(population_size=50, elite_size=2, cache="off", generations=1)
    run = Run(params)
    pop = run.initialise()
    before = run.offspring
    pop = step(pop, run)
    assert run.offspring - before == 48
    assert len(pop) == 50


def test_steady_state_two_evaluations_per_step():
    params = _string_params(replacement="steady_state", cache="off")
    run = Run(params)
    pop = run.initialise()
    for _ in range(10):
        before = run.offspring
        pop = step(pop, run)
        assert run.offspring - before == 2 and len(pop) == 40


def test_steady_state_generation_accounting():
    params = _string_params(replacement="steady_state", cache="off", population_size=21,
                            elite_size=1, generations=3)
    run = Run(params)
    counts = []
    search_loop(params, run=run, on_generation=lambda s: counts.append(run.offspring))
    # 20 children per generation, two per step
    assert counts == [21, 41, 61, 81]


def test_clones_without_variation_stay_put():
    g = grammar(EXPR)
    rep = Representation(g)
    params = Parameters(problem="string_match", target="x", grammar_file="expression.bnf",
                        population_size=10, crossover_probability=0.0,
                        mutation_probability=0.0, random_seed=0)
    run = Run(params)
    clone = rep.from_genome([1, 0])
    pop = [clone.copy() for _ in range(10)]
    run.evaluate(pop)
    for _ in range(3):
        pop = step(pop, run)
    assert {i.phenotype for i in pop} == {"x"} and {i.fitness for i in pop} == {0.0}


def test_cache_coherence_on_a_run():
    params = _string_params(population_size=60, generations=8, cache="lookup")
    run = Run(params)
    calls = Counting(run.problem)
    run.problem = calls
    search_loop(params, run=run)
    assert len(calls.calls) == len(set(calls.calls)) == run.cache.misses
    fresh = Run(params).problem
    for phenotype, value in run.cache.store.items():
        assert value == safe_fitness(fresh, phenotype)


def test_custom_step_is_used():
    seen = []

    def lazy_step(population, run):
        seen.append(len(population))
        return population

    search_loop(_string_params(generations=3), step=lazy_step)
    assert seen == [40, 40, 40]


def test_configuration_errors_name_the_key():
    with pytest.raises(ConfigurationError) as err:
        Run(_string_params(elite_size=40))
    assert err.value.key == "elite_size"
    with pytest.raises(ConfigurationError) as err:
        Run(_string_params(max_init_depth=2))
    assert err.value.key == "max_init_depth"


@pytest.mark.parametrize("init", ["random_genome", "random_tree", "rhh", "pi_grow"])
@pytest.mark.parametrize("variation", [
    dict(crossover="variable_twopoint", mutation="genome_flip"),
    dict(crossover="subtree", mutation="subtree"),
    dict(crossover="fixed_onepoint", mutation="codon_flip", selection="truncation"),
])
def test_operator_combinations_run(init, variation):
    params = _string_params(initialisation=init, **variation)
    best, history = search_loop(params)
    assert len(history) == 6 and best.fitness is not WORST


def test_all_invalid_population_falls_back():
    params = Parameters(problem="string_match", grammar_file="expression.bnf",
                        initialisation="random_genome", genome_length=1,
                        population_size=10, generations=2, random_seed=0)
    best, history = search_loop(params)
    assert len(history) == 3
