from .crossover import (
    LINEAR_VARIANTS,
    crossover_linear,
    crossover_subtree,
    onepoint_splice,
    twopoint_splice,
)
from .initialisation import TREE_METHODS, init_random_genome, init_tree_based, ramp_plan
from .mutation import mutate_codon_flip, mutate_genome_flip, mutate_subtree
from .replacement import replace_generational, replace_steady_state
from .selection import select_tournament, select_truncation

__all__ = [
    "LINEAR_VARIANTS",
    "TREE_METHODS",
    "crossover_linear",
    "crossover_subtree",
    "init_random_genome",
    "init_tree_based",
    "mutate_codon_flip",
    "mutate_genome_flip",
    "mutate_subtree",
    "onepoint_splice",
    "ramp_plan",
    "replace_generational",
    "replace_steady_state",
    "select_tournament",
    "select_truncation",
    "twopoint_splice",
]
