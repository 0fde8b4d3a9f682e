"""Linear (genome) and subtree crossover. Every crossover yields two children."""

from __future__ import annotations

from ..individual import Individual, Representation, WORST
from ..mapper import map_genome_with_tree

LINEAR_VARIANTS = ("fixed_onepoint", "fixed_twopoint", "variable_onepoint", "variable_twopoint")
SUBTREE_RETRIES = 10


def onepoint_splice(a, b, point_a: int, point_b: int):
    return a[:point_a] + b[point_b:], b[:point_b] + a[point_a:]


def twopoint_splice(a, b, points_a, points_b):
    (a1, a2), (b1, b2) = points_a, points_b
    return a[:a1] + b[b1:b2] + a[a2:], b[:b1] + a[a1:a2] + b[b2:]


def fresh_copy(ind: Individual) -> Individual:
    """A copy that the engine will evaluate again (invalids stay worst)."""
    child = ind.copy()
    child.fitness = WORST if child.invalid else None
    return child


def _last_point(ind, within_used):
    length = len(ind.genome)
    if within_used:
        used = min(ind.used_codons, length)
        if used >= 2:
            return used - 1
    return length - 1


def _two_points(rng, last):
    if last < 2:
        return 1, 1
    p, q = rng.sample(range(1, last + 1), 2)
    return min(p, q), max(p, q)


def crossover_linear(parent_a: Individual, parent_b: Individual, variant: str,
                     rep: Representation, rng, within_used: bool = True):
    """Splice the two genomes and re-map the children.

    Points are drawn from the used part of each genome unless
    ``within_used`` is false. Children may be invalid.
    """
    a, b = parent_a.genome, parent_b.genome
    last_a, last_b = _last_point(parent_a, within_used), _last_point(parent_b, within_used)
    if last_a < 1 or last_b < 1:
        return fresh_copy(parent_a), fresh_copy(parent_b)

    if variant == "fixed_onepoint":
        p = rng.randint(1, min(last_a, last_b))
        genomes = onepoint_splice(a, b, p, p)
    elif variant == "fixed_twopoint":
        pts = _two_points(rng, min(last_a, last_b))
        genomes = twopoint_splice(a, b, pts, pts)
    elif variant == "variable_onepoint":
        genomes = onepoint_splice(a, b, rng.randint(1, last_a), rng.randint(1, last_b))
    elif variant == "variable_twopoint":
        genomes = twopoint_splice(a, b, _two_points(rng, last_a), _two_points(rng, last_b))
    else:
        raise ValueError(f"unknown linear crossover {variant!r}")
    return rep.from_genome(genomes[0]), rep.from_genome(genomes[1])


def ensure_tree(ind: Individual, rep: Representation):
    if ind.tree is None and not ind.invalid:
        _, ind.tree = map_genome_with_tree(rep.grammar, ind.genome, rep.max_wraps,
                                           rep.mapping_depth_limit)
    return ind.tree


def graft(root, target, donor):
    """Copy of ``root`` with the subtree at node ``target`` replaced by ``donor``."""
    if root is target:
        new = donor.copy()
        new.renumber(root.depth)
        return new
    new_root = None
    stack = [(root, None)]
    while stack:
        node, parent = stack.pop()
        if node is target:
            twin = donor.copy()
        else:
            twin = type(node)(node.rule, node.choice_index, node.codon, node.production, node.depth)
            stack.extend((child, twin) for child in reversed(node.children))
        if parent is None:
            new_root = twin
        else:
            parent.children.append(twin)
    new_root.renumber(root.depth)
    return new_root


def crossover_subtree(parent_a: Individual, parent_b: Individual, rep: Representation, rng):
    """Swap two subtrees rooted at the same non-terminal.

    Children deeper than ``rep.max_tree_depth`` are rejected and the swap is
    retried; after that the parents are returned unchanged. Children keep
    their parent's genome tail.
    """
    if parent_a.invalid or parent_b.invalid:
        return fresh_copy(parent_a), fresh_copy(parent_b)
    tree_a, tree_b = ensure_tree(parent_a, rep), ensure_tree(parent_b, rep)
    nodes_a, nodes_b = list(tree_a.nodes()), list(tree_b.nodes())
    common = sorted({n.rule for n in nodes_a} & {n.rule for n in nodes_b})
    if not common:
        return fresh_copy(parent_a), fresh_copy(parent_b)

    for _ in range(SUBTREE_RETRIES):
        label = common[rng.randrange(len(common))]
        cands_a = [n for n in nodes_a if n.rule == label]
        cands_b = [n for n in nodes_b if n.rule == label]
        node_a = cands_a[rng.randrange(len(cands_a))]
        node_b = cands_b[rng.randrange(len(cands_b))]
        depth_a = node_a.depth - 1 + _height(node_b)
        depth_b = node_b.depth - 1 + _height(node_a)
        if max(depth_a, depth_b) > rep.max_tree_depth:
            continue
        child_a = rep.from_tree(graft(tree_a, node_a, node_b), parent_a.tail)
        child_b = rep.from_tree(graft(tree_b, node_b, node_a), parent_b.tail)
        return child_a, child_b
    return fresh_copy(parent_a), fresh_copy(parent_b)


def _height(node):
    """Levels in the subtree below and including ``node``."""
    return max(n.depth for n in node.nodes()) - node.depth + 1
