"""Population initialisers: random genomes and ramped tree builders."""

from __future__ import annotations

from ..errors import DepthInfeasible
from ..individual import Individual, Representation
from ..tree import build_tree

TREE_METHODS = ("random_grow", "rhh", "pi_grow")


def init_random_genome(pop_size: int, genome_length: int, rep: Representation, rng) -> list[Individual]:
    """Uniformly random genomes, mapped. Invalid individuals are kept."""
    if pop_size <= 0:
        raise ValueError("pop_size must be positive")
    if genome_length <= 0:
        raise ValueError("genome_length must be positive")
    return [
        rep.from_genome([rng.randrange(rep.codon_size) for _ in range(genome_length)])
        for _ in range(pop_size)
    ]


def ramp_plan(pop_size: int, depths, method: str) -> list[tuple[int, str]]:
    """The (max depth, build mode) used for each slot of a tree-initialised population.

    Depth buckets are filled as evenly as possible, the first buckets taking
    any remainder. Under ``rhh`` each bucket alternates full and grow.
    """
    depths = sorted(depths)
    if method == "random_grow":
        return [(depths[-1], "grow")] * pop_size
    if method not in ("rhh", "pi_grow"):
        raise ValueError(f"unknown tree initialiser {method!r}")
    base, extra = divmod(pop_size, len(depths))
    plan = []
    for k, depth in enumerate(depths):
        for j in range(base + (k < extra)):
            if method == "rhh":
                plan.append((depth, "full" if j % 2 == 0 else "grow"))
            else:
                plan.append((depth, "pi_grow"))
    return plan


def init_tree_based(pop_size: int, depths, method: str, rep: Representation, rng) -> list[Individual]:
    """Build trees per :func:`ramp_plan`, then append a random tail half the used length."""
    if pop_size <= 0:
        raise ValueError("pop_size must be positive")
    depths = list(depths)
    if not depths:
        raise ValueError("empty depth ramp")
    need = rep.grammar.rules[rep.grammar.start].min_depth
    if min(depths) < need:
        raise DepthInfeasible(f"ramp starts at {min(depths)} but the grammar needs depth {need}")
    population = []
    for depth, mode in ramp_plan(pop_size, depths, method):
        tree = build_tree(rep.grammar, depth, mode, rng, rep.codon_size)
        ind = rep.from_tree(tree)
        tail = [rng.randrange(rep.codon_size) for _ in range(ind.used_codons // 2)]
        ind.genome.extend(tail)
        population.append(ind)
    return population
