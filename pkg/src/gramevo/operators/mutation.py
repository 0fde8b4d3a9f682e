"""Linear (codon) mutation and subtree mutation."""

from __future__ import annotations

from ..individual import Individual, Representation
from ..tree import build_tree
from .crossover import ensure_tree, fresh_copy, graft


def _scope(ind, within_used):
    length = len(ind.genome)
    if within_used and ind.used_codons >= 1:
        return min(ind.used_codons, length)
    return length


def mutate_codon_flip(ind: Individual, probability: float, rep: Representation, rng,
                      within_used: bool = True) -> Individual:
    """Redraw each in-scope codon independently with ``probability``."""
    genome = list(ind.genome)
    changed = False
    for i in range(_scope(ind, within_used)):
        if rng.random() < probability:
            genome[i] = rng.randrange(rep.codon_size)
            changed = True
    return rep.from_genome(genome) if changed else fresh_copy(ind)


def mutate_genome_flip(ind: Individual, num_events: int, rep: Representation, rng,
                       within_used: bool = True) -> Individual:
    """Redraw ``num_events`` in-scope codons, positions drawn with replacement."""
    if num_events <= 0:
        return fresh_copy(ind)
    genome = list(ind.genome)
    scope = _scope(ind, within_used)
    for _ in range(num_events):
        genome[rng.randrange(scope)] = rng.randrange(rep.codon_size)
    return rep.from_genome(genome)


def mutate_subtree(ind: Individual, rep: Representation, rng) -> Individual:
    """Regrow a uniformly chosen node's subtree with grow, within ``rep.max_tree_depth``."""
    if ind.invalid:
        return fresh_copy(ind)
    tree = ensure_tree(ind, rep)
    nodes = list(tree.nodes())
    node = nodes[rng.randrange(len(nodes))]
    budget = rep.max_tree_depth - node.depth + 1
    if budget < rep.grammar.rules[node.rule].min_depth:
        return fresh_copy(ind)
    subtree = build_tree(rep.grammar, rep.max_tree_depth, "grow", rng, rep.codon_size,
                         root=node.rule, root_depth=node.depth)
    return rep.from_tree(graft(tree, node, subtree), ind.tail)
