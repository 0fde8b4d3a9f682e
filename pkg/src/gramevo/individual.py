"""Individuals, the worst-fitness sentinel and the genome/tree constructors."""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import Grammar
from .mapper import DEFAULT_CODON_SIZE, check_genome, map_genome, map_genome_with_tree
from .tree import DerivationTree, tree_depth, tree_node_count, tree_phenotype, tree_to_genome


class _Worst:
    """Fitness of invalid or failed individuals.

    Strictly worse than every real fitness whatever the optimisation
    direction, so it never has to be flipped between min and max problems.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "WORST"

    def __str__(self):
        return "worst"

    def __reduce__(self):
        return (_Worst, ())


WORST = _Worst()


def is_worst(fitness) -> bool:
    return fitness is WORST


def fitness_key(maximise: bool = False):
    """Sort key over fitness values: ascending order puts the best first."""
    sign = -1.0 if maximise else 1.0

    def key(fitness):
        if fitness is WORST or fitness is None:
            return (1, 0.0)
        return (0, sign * fitness)

    return key


def rank_key(maximise: bool = False):
    """Like :func:`fitness_key` but applied to individuals."""
    fk = fitness_key(maximise)
    return lambda ind: fk(ind.fitness)


def best_of(individuals, maximise: bool = False):
    return min(individuals, key=rank_key(maximise))


@dataclass(eq=False)
class Individual:
    genome: list[int]
    tree: DerivationTree | None = None
    phenotype: str | None = None
    invalid: bool = False
    used_codons: int = 0
    depth: int | None = None
    nodes: int | None = None
    wraps: int = 0
    # None until evaluated; WORST for invalids
    fitness: object = None

    def copy(self) -> Individual:
        # trees are never mutated in place by operators, sharing is safe
        return Individual(list(self.genome), self.tree, self.phenotype, self.invalid,
                          self.used_codons, self.depth, self.nodes, self.wraps,
                          self.fitness)

    @property
    def tail(self) -> list[int]:
        return self.genome[self.used_codons:]


@dataclass(frozen=True)
class Representation:
    """How genomes become individuals for one run.

    ``max_tree_depth`` bounds the subtree operators; ``mapping_depth_limit``
    is an optional guard on linear mapping (off by default).
    """

    grammar: Grammar
    codon_size: int = DEFAULT_CODON_SIZE
    max_wraps: int = 0
    max_tree_depth: int = 90
    mapping_depth_limit: int | None = None
    keep_trees: bool = True

    def from_genome(self, genome, with_tree: bool | None = None) -> Individual:
        genome = list(genome)
        check_genome(genome, self.codon_size)
        with_tree = self.keep_trees if with_tree is None else with_tree
        tree = None
        if with_tree:
            result, tree = map_genome_with_tree(self.grammar, genome, self.max_wraps,
                                                self.mapping_depth_limit)
        else:
            result = map_genome(self.grammar, genome, self.max_wraps, self.mapping_depth_limit)
        ind = Individual(genome, tree, result.phenotype, result.invalid, result.used_codons,
                         result.depth, result.nodes, result.wraps)
        if result.invalid:
            ind.fitness = WORST
        return ind

    def from_tree(self, tree: DerivationTree, tail=()) -> Individual:
        genome = tree_to_genome(tree) + list(tail)
        return Individual(
            genome,
            tree if self.keep_trees else None,
            tree_phenotype(tree),
            False,
            len(genome) - len(tail),
            tree_depth(tree),
            tree_node_count(tree),
        )
