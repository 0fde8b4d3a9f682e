import collections
import itertools
import math
import random

import pytest

from gramevo.errors import EmptyCandidatePool, SizeMismatch
from gramevo.individual import WORST, Individual, Representation
from gramevo.mapper import map_genome
from gramevo.operators import (
    crossover_linear,
    crossover_subtree,
    init_random_genome,
    init_tree_based,
    mutate_codon_flip,
    mutate_genome_flip,
    mutate_subtree,
    ramp_plan,
    replace_generational,
    replace_steady_state,
    select_tournament,
    select_truncation,
)
from gramevo.operators.crossover import onepoint_splice, twopoint_splice
from gramevo.tree import build_tree, tree_depth, tree_to_genome

from conftest import DOUBLING, EXPR, StubRng, grammar, ind


def fits(pop):
    return sorted(i.fitness for i in pop)


# -- initialisation --------------------------------------------------------------

def test_random_genome_rejects_empty_population(expr_rep, rng):
    with pytest.raises(ValueError):
        init_random_genome(0, 10, expr_rep, rng)


def test_random_genome_single_choice_grammar(rng):
    rep = Representation(grammar("<a> ::= x"))
    pop = init_random_genome(50, 8, rep, rng)
    assert all(not i.invalid and i.phenotype == "x" for i in pop)


def _pending_simulation(genome):
    """Independent invalidity oracle for <a> ::= <a><a> | x without wrapping."""
    pending = 1
    for c in genome:
        pending += 1 if c % 2 == 0 else -1
        if pending == 0:
            return False
    return True


def test_random_genome_invalid_fraction_matches_simulation():
    rep = Representation(grammar(DOUBLING))
    pop = init_random_genome(10_000, 10, rep, random.Random(77))
    measured = sum(i.invalid for i in pop) / len(pop)
    simulated = sum(_pending_simulation(i.genome) for i in pop) / len(pop)
    assert abs(measured - simulated) <= 0.02
    assert all(i.fitness is WORST for i in pop if i.invalid)


def test_rhh_bucket_counts(expr_rep, rng):
    pop = init_tree_based(20, range(2, 7), "rhh", expr_rep, rng)
    plan = ramp_plan(20, range(2, 7), "rhh")
    counts = collections.Counter(depth for depth, _ in plan)
    assert counts == {d: 4 for d in range(2, 7)}
    modes = collections.Counter(mode for _, mode in plan)
    assert modes == {"full": 10, "grow": 10}
    for (depth, _), i in zip(plan, pop):
        assert i.depth <= depth


def test_ramp_plan_uneven_and_random_grow():
    plan = ramp_plan(7, [3, 4, 5], "rhh")
    assert collections.Counter(d for d, _ in plan) == {3: 3, 4: 2, 5: 2}
    assert ramp_plan(4, [3, 4, 5], "random_grow") == [(5, "grow")] * 4
    assert {m for _, m in ramp_plan(9, [3, 4, 5], "pi_grow")} == {"pi_grow"}


@pytest.mark.parametrize("method", ["rhh", "pi_grow", "random_grow"])
def test_tree_initialisers_are_valid_with_half_tails(expr_rep, method):
    pop = init_tree_based(300, range(2, 9), method, expr_rep, random.Random(method))
    for i in pop:
        assert not i.invalid
        assert len(i.genome) == i.used_codons + i.used_codons // 2
        assert tree_to_genome(i.tree) == i.genome[:i.used_codons]
        assert map_genome(expr_rep.grammar, i.genome).phenotype == i.phenotype


# -- selection -------------------------------------------------------------------

def test_full_tournament_returns_the_best(rng):
    pop = [ind(f, str(f)) for f in (4.0, 2.0, 9.0, 3.0)]
    winners = select_tournament(pop, 10, 4, rng)
    assert len(winners) == 10 and all(w.fitness == 2.0 for w in winners)


def test_tournament_of_one_is_uniform():
    pop = [ind(float(f), str(f)) for f in range(5)]
    draws = 10_000
    counts = collections.Counter(w.phenotype for w in select_tournament(pop, draws, 1,
                                                                        random.Random(8)))
    p = 1 / 5
    sigma = math.sqrt(draws * p * (1 - p))
    assert all(abs(counts[str(f)] - draws * p) <= 3 * sigma for f in range(5))


def test_tournament_of_two_brute_force():
    pool = [1.0, 2.0, 3.0]
    # every ordered pair drawn with replacement is equally likely
    oracle = sum(min(pair) == 1.0 for pair in itertools.product(pool, repeat=2)) / 9
    assert oracle == pytest.approx(5 / 9)
    pop = [ind(f, str(f)) for f in pool]
    draws = 10_000
    wins = sum(w.fitness == 1.0 for w in select_tournament(pop, draws, 2, random.Random(11)))
    sigma = math.sqrt(draws * oracle * (1 - oracle))
    assert abs(wins - draws * oracle) <= 3 * sigma


def test_tournament_maximising():
    pop = [ind(f, str(f)) for f in (1.0, 5.0, 3.0)]
    assert all(w.fitness == 5.0 for w in select_tournament(pop, 5, 3, random.Random(0),
                                                           maximise=True))


def test_tournament_never_returns_invalids(rng):
    pop = [ind(WORST, "bad", invalid=True) for _ in range(5)] + [ind(9.0, "ok")]
    assert all(not w.invalid for w in select_tournament(pop, 200, 3, rng))
    with pytest.raises(EmptyCandidatePool):
        select_tournament([ind(WORST, invalid=True)], 1, 2, rng)
    assert len(select_tournament([ind(WORST, invalid=True)] * 2, 3, 2, rng,
                                 allow_invalids=True)) == 3


def test_truncation():
    pop = [ind(float(f)) for f in (5, 1, 3, 2, 4)]
    assert fits(select_truncation(pop, 1.0)) == [1, 2, 3, 4, 5]
    assert [i.fitness for i in select_truncation(pop, 1.0)] == [1, 2, 3, 4, 5]
    assert fits(select_truncation(pop, 0.4)) == [1, 2]
    assert fits(select_truncation(pop, 0.2)) == [1]
    assert fits(select_truncation(pop, 0.4, maximise=True)) == [4, 5]


# -- linear crossover --------------------------------------------------------------

def test_splice_oracles():
    a, b = [1, 2, 3, 4], [5, 6, 7, 8]
    assert onepoint_splice(a, b, 2, 2) == ([1, 2, 7, 8], [5, 6, 3, 4])
    assert onepoint_splice(a, b, 0, 0) == (b, a)
    assert onepoint_splice(a, b, 4, 4) == (a, b)
    long, short = list(range(10)), list(range(100, 106))
    ca, cb = twopoint_splice(long, short, (2, 7), (1, 4))
    assert (len(ca), len(cb)) == (8, 8)
    assert ca == [0, 1, 101, 102, 103, 7, 8, 9]
    assert cb == [100, 2, 3, 4, 5, 6, 104, 105]
    assert sorted(ca + cb) == sorted(long + short)


def _random_parent(rep, rng, length=None):
    length = length or rng.randrange(4, 30)
    return rep.from_genome([rng.randrange(rep.codon_size) for _ in range(length)])


@pytest.mark.parametrize("variant", ["fixed_onepoint", "fixed_twopoint",
                                     "variable_onepoint", "variable_twopoint"])
def test_linear_crossover_algebra(expr_rep, variant):
    rng = random.Random(variant)
    for _ in range(500):
        a, b = _random_parent(expr_rep, rng), _random_parent(expr_rep, rng)
        ca, cb = crossover_linear(a, b, variant, expr_rep, rng, within_used=rng.random() < 0.5)
        assert sorted(ca.genome + cb.genome) == sorted(a.genome + b.genome)
        if variant.startswith("fixed"):
            assert {len(ca.genome), len(cb.genome)} <= {len(a.genome), len(b.genome)}
            if len(a.genome) == len(b.genome):
                assert len(ca.genome) == len(cb.genome) == len(a.genome)
        for child in (ca, cb):
            assert child.invalid == (child.phenotype is None)
            assert (child.fitness is WORST) == child.invalid


def test_fixed_crossover_preserves_lengths_for_equal_used(expr_rep):
    rng = random.Random(3)
    for _ in range(200):
        a = _random_parent(expr_rep, rng, 12)
        b = _random_parent(expr_rep, rng, 12)
        ca, cb = crossover_linear(a, b, "fixed_onepoint", expr_rep, rng)
        assert len(ca.genome) == len(cb.genome) == 12


def test_crossover_points_stay_within_used(expr_rep):
    rng = random.Random(4)
    g = expr_rep.grammar
    # used prefix of 5 codons then a long tail of sentinels
    a = expr_rep.from_genome([0, 1, 0, 1, 1] + [7] * 20)
    b = expr_rep.from_genome([0, 1, 1, 1, 0] + [9] * 20)
    assert a.used_codons == b.used_codons == 5
    for _ in range(200):
        ca, cb = crossover_linear(a, b, "variable_onepoint", expr_rep, rng)
        # point in [1, 4] on each parent: heads come from the used region only
        assert ca.genome[0] == 0 and cb.genome[0] == 0
        assert ca.genome[-20:] == [9] * 20 and cb.genome[-20:] == [7] * 20
        assert not map_genome(g, ca.genome).invalid or ca.invalid


# -- subtree crossover -------------------------------------------------------------

def test_subtree_crossover_identical_single_nodes(rng):
    rep = Representation(grammar("<a> ::= x"))
    p = rep.from_genome([0])
    ca, cb = crossover_subtree(p, p.copy(), rep, rng)
    assert ca.phenotype == cb.phenotype == "x"


def test_subtree_crossover_root_swap(expr_rep):
    rng = random.Random(1)
    g = expr_rep.grammar
    a = expr_rep.from_tree(build_tree(g, 3, "full", rng))
    b = expr_rep.from_tree(build_tree(g, 4, "full", rng))
    seen_swap = False
    for _ in range(200):
        ca, cb = crossover_subtree(a, b, expr_rep, rng)
        if {ca.phenotype, cb.phenotype} == {a.phenotype, b.phenotype} and ca.phenotype == b.phenotype:
            seen_swap = True
    assert seen_swap


def test_subtree_crossover_sweep(expr_rep):
    rng = random.Random(2)
    g = expr_rep.grammar
    for _ in range(1000):
        a = expr_rep.from_tree(build_tree(g, rng.randint(2, 7), "grow", rng))
        b = expr_rep.from_tree(build_tree(g, rng.randint(2, 7), "grow", rng))
        for child in crossover_subtree(a, b, expr_rep, rng):
            assert not child.invalid
            assert child.depth <= expr_rep.max_tree_depth
            r = map_genome(g, child.genome)
            assert r.phenotype == child.phenotype and r.used_codons == child.used_codons


def test_subtree_crossover_respects_depth_limit():
    g = grammar(EXPR)
    rep = Representation(g, max_tree_depth=6)
    rng = random.Random(6)
    for _ in range(300):
        a = rep.from_tree(build_tree(g, 6, "full", rng))
        b = rep.from_tree(build_tree(g, 6, "full", rng))
        for child in crossover_subtree(a, b, rep, rng):
            assert child.depth <= 6


def test_subtree_crossover_keeps_tails(expr_rep, rng):
    g = expr_rep.grammar
    a = expr_rep.from_tree(build_tree(g, 4, "full", rng), tail=[11, 12])
    b = expr_rep.from_tree(build_tree(g, 4, "full", rng), tail=[21])
    ca, cb = crossover_subtree(a, b, expr_rep, rng)
    assert ca.genome[-2:] == [11, 12] and cb.genome[-1:] == [21]


# -- mutation ----------------------------------------------------------------------

def test_codon_flip_zero_probability_is_identity(expr_rep, rng):
    p = _random_parent(expr_rep, rng, 10)
    assert mutate_codon_flip(p, 0.0, expr_rep, rng).genome == p.genome


def test_codon_flip_probability_one_redraws_everything():
    rep = Representation(grammar(EXPR), codon_size=50)
    rng = random.Random(5)
    unchanged = 0
    trials = 10_000
    for _ in range(trials):
        p = rep.from_genome([rng.randrange(50) for _ in range(10)])
        m = mutate_codon_flip(p, 1.0, rep, rng, within_used=False)
        unchanged += sum(x == y for x, y in zip(p.genome, m.genome))
    expected = trials * 10 / 50
    sigma = math.sqrt(trials * 10 * (1 / 50) * (49 / 50))
    assert abs(unchanged - expected) <= 4 * sigma


def test_codon_flip_within_used_leaves_tail(expr_rep):
    rng = random.Random(6)
    p = expr_rep.from_genome([0, 1, 0, 1, 1, 5, 6])
    assert p.used_codons == 5
    for _ in range(300):
        m = mutate_codon_flip(p, 0.9, expr_rep, rng)
        assert m.genome[5:] == [5, 6]


def test_genome_flip_counts_and_positions(expr_rep):
    rng = random.Random(7)
    p = expr_rep.from_genome([0, 1, 1, 1, 0])
    assert mutate_genome_flip(p, 0, expr_rep, rng).genome == p.genome
    hits = collections.Counter()
    for _ in range(10_000):
        m = mutate_genome_flip(p, 1, expr_rep, rng, within_used=False)
        for k, (x, y) in enumerate(zip(p.genome, m.genome)):
            hits[k] += x != y
    sigma = math.sqrt(10_000 * 0.2 * 0.8)
    assert all(abs(hits[k] - 2000) <= 4 * sigma for k in range(5))
    q = expr_rep.from_genome([1, 1, 3, 3, 3])
    assert q.used_codons == 2
    for _ in range(300):
        assert mutate_genome_flip(q, 3, expr_rep, rng).genome[2:] == [3, 3, 3]


def test_subtree_mutation_single_node():
    rep = Representation(grammar("<a> ::= x"))
    assert mutate_subtree(rep.from_genome([0]), rep, random.Random(0)).phenotype == "x"


def test_subtree_mutation_sweep(expr_rep):
    rng = random.Random(8)
    g = expr_rep.grammar
    for _ in range(1000):
        p = expr_rep.from_tree(build_tree(g, rng.randint(2, 8), "grow", rng))
        m = mutate_subtree(p, expr_rep, rng)
        assert not m.invalid and m.depth <= expr_rep.max_tree_depth
        assert map_genome(g, m.genome).phenotype == m.phenotype


def test_subtree_mutation_at_a_leaf_changes_one_variable():
    g = grammar(EXPR)
    rep = Representation(g, max_tree_depth=8)
    rng = random.Random(9)
    parent = rep.from_tree(build_tree(g, 4, "full", rng))
    nodes = list(parent.tree.nodes())
    leaves = [k for k, n in enumerate(nodes) if n.rule == "v"]
    changed = 0
    for trial in range(400):
        # the first draw picks the node to regrow: force a <v> leaf
        stub = StubRng([leaves[trial % len(leaves)]], seed=trial)
        child = mutate_subtree(parent, rep, stub)
        assert len(child.phenotype) == len(parent.phenotype)
        diff = sum(x != y for x, y in zip(child.phenotype, parent.phenotype))
        assert diff <= 1
        changed += diff
    assert changed > 0


# -- replacement -------------------------------------------------------------------

def test_generational_replacement():
    parents = [ind(float(f)) for f in (3, 1, 2, 5)]
    children = [ind(float(f)) for f in (9, 8, 7, 6)]
    assert replace_generational(parents, children, 0) == children
    kept = replace_generational(parents, children[:3], 1)
    assert 1.0 in fits(kept) and len(kept) == 4
    kept = replace_generational(parents, children[:1], 3)
    assert fits(kept)[:3] == [1, 2, 3]
    with pytest.raises(SizeMismatch):
        replace_generational(parents, children, 1)


def test_elitism_keeps_best_when_children_are_worse():
    parents = [ind(0.5)] + [ind(2.0) for _ in range(4)]
    children = [ind(9.0) for _ in range(4)]
    assert 0.5 in fits(replace_generational(parents, children, 1))


def test_steady_state_replacement():
    pop = [ind(float(f)) for f in (1, 2, 3, 4)]
    out = replace_steady_state(pop, [ind(10.0), ind(11.0)])
    assert fits(out) == [1, 2, 10, 11]
    pair = [ind(1.0), ind(2.0)]
    assert fits(replace_steady_state(pair, [ind(5.0), ind(6.0)])) == [5, 6]
    with pytest.raises(SizeMismatch):
        replace_steady_state(pop, [ind(1.0)])


def test_exhaustive_small_replacement_oracles():
    values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    for n in range(2, 7):
        for perm in itertools.permutations(values[:n]):
            pop = [ind(f) for f in perm]
            out = replace_steady_state(pop, [ind(50.0), ind(60.0)])
            assert len(out) == n
            assert fits(out) == sorted(perm)[:-2] + [50.0, 60.0]
            for e in range(n):
                kept = replace_generational(pop, [ind(99.0)] * (n - e), e)
                assert fits(kept)[:e] == sorted(perm)[:e]
