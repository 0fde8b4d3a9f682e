"""Grammatical evolution: grammar-driven genotype-to-phenotype mapping and search."""

from .engine import FitnessCache, GenerationStats, Run, evaluate, search_loop, step
from .grammar import Grammar, GrammarContext, load_grammar, parse_bnf
from .individual import WORST, Individual, Representation
from .mapper import map_genome, map_genome_with_tree
from .params import Parameters, load_parameters, save_parameters
from .tree import DerivationTree, build_tree, tree_to_genome

__version__ = "0.1.0"

__all__ = [
    "WORST", "DerivationTree", "FitnessCache", "GenerationStats", "Grammar", "GrammarContext",
    "Individual", "Parameters", "Representation", "Run", "build_tree", "evaluate",
    "load_grammar", "load_parameters", "map_genome", "map_genome_with_tree", "parse_bnf",
    "save_parameters", "search_loop", "step", "tree_to_genome",
]
