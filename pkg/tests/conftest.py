import random

import pytest

from gramevo.grammar import GrammarContext, load_grammar, parse_bnf
from gramevo.individual import Individual, Representation

EXPR = "<e> ::= <e>+<e> | <v>\n<v> ::= x | y\n"
FIG3 = "<op> ::= + | - | * | /\n"
DOUBLING = "<a> ::= <a><a> | x\n"

# shipped grammars used as fixtures for the representation properties
FIXTURE_GRAMMARS = ("expression.bnf", "quartic.bnf", "string_match.bnf", "program_max.bnf")


def grammar(text, n_vars=None):
    return parse_bnf(text, GrammarContext(n_vars))


def shipped(name, n_vars=5):
    return load_grammar(name, GrammarContext(n_vars))


class StubRng:
    """Returns canned values for randrange; delegates everything else."""

    def __init__(self, values, seed=0):
        self.values = list(values)
        self._rng = random.Random(seed)

    def randrange(self, *args):
        if self.values:
            return self.values.pop(0)
        return self._rng.randrange(*args)

    def __getattr__(self, name):
        return getattr(self._rng, name)


def ind(fitness, tag=None, invalid=False):
    """A bare individual carrying only a fitness (and a label in the phenotype)."""
    return Individual([0], phenotype=tag, invalid=invalid, fitness=fitness)


@pytest.fixture
def expr_grammar():
    return grammar(EXPR)


@pytest.fixture
def expr_rep(expr_grammar):
    return Representation(expr_grammar, max_tree_depth=12)


@pytest.fixture
def rng():
    return random.Random(12345)


# -- acceptance report -------------------------------------------------------------

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Note one (part of a) numbered acceptance criterion for the summary."""
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
