"""Survivor selection."""

from __future__ import annotations

from ..errors import SizeMismatch
from ..individual import rank_key


def replace_generational(parents, children, elite_size: int, maximise: bool = False):
    """Children replace the parents, except for the ``elite_size`` best parents."""
    if len(children) + elite_size != len(parents):
        raise SizeMismatch(
            f"{len(children)} children + {elite_size} elites != {len(parents)} parents"
        )
    elites = sorted(parents, key=rank_key(maximise))[:elite_size]
    return elites + list(children)


def replace_steady_state(population, children, maximise: bool = False):
    """GENITOR replacement: the two worst members make way for the children,
    whether or not the children are any better."""
    if len(children) != 2:
        raise SizeMismatch("steady state replacement takes exactly 2 children")
    if len(population) < 2:
        raise SizeMismatch("population must hold at least 2 individuals")
    order = sorted(range(len(population)), key=lambda i: rank_key(maximise)(population[i]))
    doomed = set(order[-2:])
    return [ind for i, ind in enumerate(population) if i not in doomed] + list(children)
