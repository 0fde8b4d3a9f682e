"""Genotype to phenotype mapping with the mod rule.

Two mappers share one contract. :func:`map_genome` only tracks the numbers
(depth, node count, codons used) and never allocates tree nodes, which is the
fast path when every operator in a run works on the linear genome.
:func:`map_genome_with_tree` additionally materializes the derivation tree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import Grammar
from .tree import DerivationTree

DEFAULT_CODON_SIZE = 100_000


@dataclass(frozen=True)
class MappingResult:
    phenotype: str | None
    invalid: bool
    used_codons: int
    wraps: int
    depth: int | None = None
    nodes: int | None = None


def check_genome(genome, codon_size: int = DEFAULT_CODON_SIZE) -> None:
    """Reject genomes that break the codon range contract."""
    if len(genome) == 0:
        raise ValueError("genome must not be empty")
    for c in genome:
        if not 0 <= c < codon_size:
            raise ValueError(f"codon {c} outside [0, {codon_size})")


def _compiled(grammar: Grammar):
    """Per-rule (num_choices, choices) with symbols flattened to tuples."""
    table = grammar.cache.get("mapper")
    if table is None:
        table = {
            name: (
                rule.num_choices,
                tuple(
                    tuple((not s.is_terminal, s.text) for s in p.symbols)
                    for p in rule.choices
                ),
            )
            for name, rule in grammar.rules.items()
        }
        grammar.cache["mapper"] = table
    return table


def map_genome(grammar: Grammar, genome, max_wraps: int = 0,
               max_depth: int | None = None) -> MappingResult:
    """Left-first derivation of ``grammar.start`` driven by ``genome``.

    Every non-terminal, unit rules included, consumes one codon ``c`` and
    expands choice ``c % num_choices``. When the genome runs out the reader
    wraps to codon 0, at most ``max_wraps`` times; a derivation still holding
    non-terminals after that is invalid. ``max_depth`` optionally aborts
    (as invalid) any derivation that goes deeper.
    """
    table = _compiled(grammar)
    n = len(genome)
    if n == 0:
        raise ValueError("genome must not be empty")
    limit = n * (max_wraps + 1)
    out = []
    used = nodes = deepest = 0
    stack = [(True, grammar.start, 1)]
    pop, push = stack.pop, stack.append
    while stack:
        is_nt, text, depth = pop()
        if not is_nt:
            out.append(text)
            continue
        if used >= limit or (max_depth is not None and depth > max_depth):
            return MappingResult(None, True, used, (used - 1) // n if used else 0)
        num, choices = table[text]
        symbols = choices[genome[used % n] % num]
        used += 1
        nodes += 1
        if depth > deepest:
            deepest = depth
        child_depth = depth + 1
        for is_child_nt, child in reversed(symbols):
            push((is_child_nt, child, child_depth))
    wraps = (used - 1) // n
    return MappingResult("".join(out), False, used, wraps, deepest, nodes)


def map_genome_with_tree(grammar: Grammar, genome, max_wraps: int = 0,
                         max_depth: int | None = None):
    """As :func:`map_genome`, also returning the derivation tree (None if invalid)."""
    rules = grammar.rules
    n = len(genome)
    if n == 0:
        raise ValueError("genome must not be empty")
    limit = n * (max_wraps + 1)
    out = []
    used = nodes = deepest = 0
    root = None
    # entries: a terminal string, or (rule name, depth, parent node)
    stack = [(grammar.start, 1, None)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        name, depth, parent = item
        if used >= limit or (max_depth is not None and depth > max_depth):
            return MappingResult(None, True, used, (used - 1) // n if used else 0), None
        rule = rules[name]
        codon = genome[used % n]
        index = codon % rule.num_choices
        production = rule.choices[index]
        used += 1
        nodes += 1
        if depth > deepest:
            deepest = depth
        node = DerivationTree(name, index, codon, production, depth)
        if parent is None:
            root = node
        else:
            parent.children.append(node)
        for sym in reversed(production.symbols):
            stack.append(sym.text if sym.is_terminal else (sym.text, depth + 1, node))
    wraps = (used - 1) // n
    return MappingResult("".join(out), False, used, wraps, deepest, nodes), root
