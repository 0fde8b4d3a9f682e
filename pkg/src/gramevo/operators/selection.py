"""Parent selection."""

from __future__ import annotations

import math

from ..errors import EmptyCandidatePool
from ..individual import best_of, rank_key


def select_tournament(population, generation_size: int, tournament_size: int, rng,
                      allow_invalids: bool = False, maximise: bool = False):
    """Run ``generation_size`` tournaments and return the winners.

    Contestants are drawn uniformly with replacement, so a tournament of two
    over three candidates sees each of the nine ordered pairs equally often.
    An individual may win any number of tournaments. A tournament at least
    as large as the pool is a full tournament: everyone competes.
    """
    pool = list(population) if allow_invalids else [i for i in population if not i.invalid]
    if not pool:
        raise EmptyCandidatePool("no valid individuals to select from")
    if tournament_size >= len(pool):
        return [best_of(pool, maximise) for _ in range(generation_size)]
    return [best_of([pool[rng.randrange(len(pool))] for _ in range(tournament_size)], maximise)
            for _ in range(generation_size)]


def select_truncation(population, proportion: float, maximise: bool = False):
    """The best ``ceil(proportion * len(population))`` individuals, best first."""
    if not 0 < proportion <= 1:
        raise ValueError("proportion must be in (0, 1]")
    # guard against 0.7 * 10 == 7.000000000000001
    keep = max(1, math.ceil(proportion * len(population) - 1e-9))
    return sorted(population, key=rank_key(maximise))[:keep]
