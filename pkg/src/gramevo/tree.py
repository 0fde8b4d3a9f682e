"""Derivation trees: representation, codon synthesis and depth-aware building.

Every expansion node remembers the codon that reproduces its choice under the
mod rule, so reading a tree's codons in pre-order gives a genome that the
linear mapper turns back into the very same tree.

All traversals are iterative; linear genomes on right-recursive grammars can
produce trees much deeper than Python's recursion limit.
"""

from __future__ import annotations

import enum

from .errors import DepthInfeasible, RangeTooSmall
from .grammar import Grammar, Production

DEFAULT_CODON_SIZE = 100_000


class DerivationTree:
    """One expansion of ``rule`` by its ``choice_index``-th production."""

    __slots__ = ("rule", "choice_index", "codon", "production", "depth", "children")

    def __init__(self, rule: str, choice_index: int, codon: int,
                 production: Production, depth: int = 1, children=None):
        self.rule = rule
        self.choice_index = choice_index
        self.codon = codon
        self.production = production
        self.depth = depth
        self.children = [] if children is None else children

    def __repr__(self):
        return (f"DerivationTree({self.rule!r}, choice={self.choice_index}, "
                f"codon={self.codon}, depth={self.depth}, children={len(self.children)})")

    def nodes(self):
        """Yield nodes in pre-order, which is also codon consumption order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def copy(self) -> DerivationTree:
        root = DerivationTree(self.rule, self.choice_index, self.codon,
                              self.production, self.depth)
        stack = [(self, root)]
        while stack:
            src, dst = stack.pop()
            for child in src.children:
                twin = DerivationTree(child.rule, child.choice_index, child.codon,
                                      child.production, child.depth)
                dst.children.append(twin)
                stack.append((child, twin))
        return root

    def renumber(self, depth: int = 1) -> None:
        """Reset node depths after a subtree has been moved."""
        self.depth = depth
        stack = [self]
        while stack:
            node = stack.pop()
            for child in node.children:
                child.depth = node.depth + 1
                stack.append(child)

    def __eq__(self, other):
        if not isinstance(other, DerivationTree):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if (a.rule, a.choice_index, a.codon, a.depth, len(a.children)) != (
                    b.rule, b.choice_index, b.codon, b.depth, len(b.children)):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    __hash__ = None

    def pretty(self) -> str:
        lines = []
        stack = [self]
        while stack:
            node = stack.pop()
            lines.append(f"{'  ' * (node.depth - 1)}<{node.rule}> [{node.codon}] -> {node.production}")
            stack.extend(reversed(node.children))
        return "\n".join(lines)


def tree_phenotype(tree: DerivationTree) -> str:
    out = []
    stack = [tree]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        kids = iter(item.children)
        seq = [s.text if s.is_terminal else next(kids) for s in item.production.symbols]
        stack.extend(reversed(seq))
    return "".join(out)


def tree_depth(tree: DerivationTree) -> int:
    return max(node.depth for node in tree.nodes())


def tree_node_count(tree: DerivationTree) -> int:
    return sum(1 for _ in tree.nodes())


def tree_to_genome(tree: DerivationTree) -> list[int]:
    return [node.codon for node in tree.nodes()]


def synthesize_codon(choice_index: int, num_choices: int,
                     codon_size: int = DEFAULT_CODON_SIZE, rng=None) -> int:
    """Random codon ``m + choice_index`` with ``m`` a positive multiple of
    ``num_choices``, so that ``codon % num_choices == choice_index``."""
    if not 0 <= choice_index < num_choices:
        raise ValueError(f"choice {choice_index} out of range for {num_choices} choices")
    # multiples are capped so the codon itself stays below codon_size
    stop = codon_size - choice_index
    if stop <= num_choices:
        raise RangeTooSmall(
            f"no multiple of {num_choices} fits below codon size {codon_size}"
        )
    return rng.randrange(num_choices, stop, num_choices) + choice_index


class BuildMode(str, enum.Enum):
    GROW = "grow"
    FULL = "full"
    PI_GROW = "pi_grow"


def max_reach(grammar: Grammar, rule: str, budget: int) -> int:
    """Deepest (relative) subtree ``rule`` can produce within ``budget`` levels.

    Returns 0 when the rule cannot complete within the budget at all.
    """
    memo = grammar.cache.setdefault("reach", {})
    key = (rule, budget)
    if key in memo:
        return memo[key]
    best = 0
    if budget >= grammar.rules[rule].min_depth:
        for p in grammar.rules[rule].choices:
            if p.min_depth <= budget:
                best = max(best, _production_reach(grammar, p, budget))
    memo[key] = best
    return best


def _production_reach(grammar, production, budget):
    return 1 + max((max_reach(grammar, nt, budget - 1) for nt in production.non_terminals),
                   default=0)


def _fitting(rule, budget):
    return [i for i, p in enumerate(rule.choices) if p.min_depth <= budget]


def _choose(rule, budget, mode, rng):
    fits = _fitting(rule, budget)
    if mode is BuildMode.FULL:
        recursive = [i for i in fits if rule.choices[i].is_recursive]
        if recursive:
            fits = recursive
        else:
            deepest = max(rule.choices[i].min_depth for i in fits)
            fits = [i for i in fits if rule.choices[i].min_depth == deepest]
    return fits[rng.randrange(len(fits))]


def build_tree(grammar: Grammar, max_depth: int, mode="grow", rng=None,
               codon_size: int = DEFAULT_CODON_SIZE, root: str | None = None,
               root_depth: int = 1) -> DerivationTree:
    """Randomly derive a tree whose nodes all lie at depth <= ``max_depth``.

    ``grow`` picks uniformly among productions that can still finish in the
    remaining depth. ``full`` prefers recursive productions so branches run
    to the limit wherever the grammar allows. ``pi_grow`` expands pending
    non-terminals in random order and keeps at least one branch able to reach
    ``max_depth`` until one does.

    ``root``/``root_depth`` grow a subtree for ``root`` as if it sat at that
    depth in a larger tree (used by subtree mutation).
    """
    mode = BuildMode(mode)
    root = grammar.start if root is None else root
    budget = max_depth - root_depth + 1
    if budget < grammar.rules[root].min_depth:
        raise DepthInfeasible(
            f"<{root}> needs depth {grammar.rules[root].min_depth}, only {budget} available"
        )
    if mode is BuildMode.PI_GROW:
        return _build_pi_grow(grammar, max_depth, rng, codon_size, root, root_depth)

    rules = grammar.rules
    tree = None
    stack = [(root, root_depth, None)]
    while stack:
        name, depth, parent = stack.pop()
        rule = rules[name]
        index = _choose(rule, max_depth - depth + 1, mode, rng)
        production = rule.choices[index]
        node = DerivationTree(name, index,
                              synthesize_codon(index, rule.num_choices, codon_size, rng),
                              production, depth)
        if parent is None:
            tree = node
        else:
            parent.children.append(node)
        for nt in reversed(production.non_terminals):
            stack.append((nt, depth + 1, node))
    return tree


def _build_pi_grow(grammar, max_depth, rng, codon_size, root, root_depth):
    rules = grammar.rules

    def can_reach(name, depth):
        budget = max_depth - depth + 1
        return max_reach(grammar, name, budget) == budget

    tree = None
    reached = root_depth == max_depth
    # entries: (rule name, depth, parent node, child slot)
    frontier = [(root, root_depth, None, 0)]
    while frontier:
        name, depth, parent, slot = frontier.pop(rng.randrange(len(frontier)))
        rule = rules[name]
        budget = max_depth - depth + 1
        fits = _fitting(rule, budget)
        if not reached and can_reach(name, depth) and not any(
                can_reach(n, d) for n, d, _, _ in frontier):
            # this is the last branch that can still hit max_depth
            fits = [i for i in fits
                    if _production_reach(grammar, rule.choices[i], budget) == budget]
        index = fits[rng.randrange(len(fits))]
        production = rule.choices[index]
        node = DerivationTree(name, index,
                              synthesize_codon(index, rule.num_choices, codon_size, rng),
                              production, depth)
        node.children = [None] * len(production.non_terminals)
        if parent is None:
            tree = node
        else:
            parent.children[slot] = node
        for k, nt in enumerate(production.non_terminals):
            frontier.append((nt, depth + 1, node, k))
        if production.non_terminals and depth + 1 == max_depth:
            reached = True
    return tree
