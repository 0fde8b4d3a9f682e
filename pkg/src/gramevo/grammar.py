"""BNF grammar parsing and analysis.

A grammar file is a sequence of rules ``<lhs> ::= alt | alt | ...``. A rule
runs until the next ``<name> ::=`` so alternatives may span several lines.
Within an alternative, ``<name>`` is a non-terminal, quoted text is a terminal
kept verbatim, and any other whitespace-delimited run of characters is an
unquoted terminal. ``#`` starts a comment unless it is inside quotes.

The phenotype of a derivation is the plain concatenation of its terminals, so
``x[<idx>]`` yields ``x[3]`` and spacing has to be written as a quoted terminal.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    DuplicateRule,
    EmptyGrammar,
    MalformedRule,
    MissingDatasetContext,
    NonPositiveRange,
    NonTerminatingRule,
    UndefinedNonTerminal,
)

GRAMMARS_DIR = Path(__file__).parent / "grammars"

_NT_RE = re.compile(r"<([A-Za-z_][\w\-.:]*)>")
_RANGE_RE = re.compile(r"GE_RANGE:(\S*)$")


class SymbolKind(enum.Enum):
    TERMINAL = "terminal"
    NON_TERMINAL = "non_terminal"


@dataclass(frozen=True)
class GrammarSymbol:
    kind: SymbolKind
    text: str

    @property
    def is_terminal(self) -> bool:
        return self.kind is SymbolKind.TERMINAL

    def __str__(self):
        if self.is_terminal:
            return _quote(self.text)
        return f"<{self.text}>"


def T(text: str) -> GrammarSymbol:
    return GrammarSymbol(SymbolKind.TERMINAL, text)


def NT(name: str) -> GrammarSymbol:
    return GrammarSymbol(SymbolKind.NON_TERMINAL, name)


@dataclass(frozen=True)
class Production:
    symbols: tuple[GrammarSymbol, ...]
    is_recursive: bool = False
    min_depth: int = 0

    @property
    def non_terminals(self) -> tuple[str, ...]:
        return tuple(s.text for s in self.symbols if not s.is_terminal)

    def __str__(self):
        return " ".join(str(s) for s in self.symbols)


@dataclass(frozen=True)
class GrammarRule:
    lhs: str
    choices: tuple[Production, ...]
    min_depth: int = 0

    @property
    def num_choices(self) -> int:
        return len(self.choices)

    @property
    def is_unit(self) -> bool:
        return len(self.choices) == 1

    @property
    def is_recursive(self) -> bool:
        return any(p.is_recursive for p in self.choices)


@dataclass(frozen=True)
class Grammar:
    """An analyzed rule table. Immutable once built; share freely."""

    rules: dict[str, GrammarRule]
    start: str
    # memo tables owned by other modules (e.g. tree depth reachability)
    cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def non_terminals(self) -> frozenset[str]:
        return frozenset(self.rules)

    @property
    def terminals(self) -> frozenset[str]:
        return frozenset(
            s.text
            for rule in self.rules.values()
            for p in rule.choices
            for s in p.symbols
            if s.is_terminal
        )

    def __getitem__(self, name: str) -> GrammarRule:
        return self.rules[name]

    def __hash__(self):
        return id(self)

    def to_bnf(self) -> str:
        """Pretty-print in a form that :func:`parse_bnf` reads back unchanged."""
        lines = []
        for rule in self.rules.values():
            alts = " | ".join(str(p) for p in rule.choices)
            lines.append(f"<{rule.lhs}> ::= {alts}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GrammarContext:
    """Values the GE_RANGE macro can refer to."""

    dataset_n_vars: int | None = None


def _quote(text: str) -> str:
    return f'"{text}"' if "'" in text else f"'{text}'"


# -- tokenizer ---------------------------------------------------------------

_DEFINE, _OR, _NT, _TERM = "define", "or", "nt", "term"


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int
    quoted: bool = False


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    line, line_start = 1, 0

    def here():
        return line, i - line_start + 1

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "'\"":
            ln, col = here()
            end = text.find(ch, i + 1)
            newline = text.find("\n", i + 1)
            if end < 0 or (0 <= newline < end):
                raise MalformedRule(f"line {ln}, column {col}: unterminated quoted terminal")
            tokens.append(_Token(_TERM, text[i + 1:end], ln, col, quoted=True))
            i = end + 1
            continue
        if text.startswith("::=", i):
            tokens.append(_Token(_DEFINE, "::=", *here()))
            i += 3
            continue
        if ch == "|":
            tokens.append(_Token(_OR, "|", *here()))
            i += 1
            continue
        m = _NT_RE.match(text, i)
        if m:
            tokens.append(_Token(_NT, m.group(1), *here()))
            i = m.end()
            continue
        # unquoted terminal: runs until something that starts another token
        ln, col = here()
        j = i
        while j < n:
            c = text[j]
            if c.isspace() or c in "'\"|#" or text.startswith("::=", j):
                break
            if j > i and c == "<" and _NT_RE.match(text, j):
                break
            j += 1
        tokens.append(_Token(_TERM, text[i:j], ln, col))
        i = j
    return tokens


# -- parsing -----------------------------------------------------------------

def expand_ge_range(token: str, context: GrammarContext | None = None) -> list[Production]:
    """Expand ``GE_RANGE:<n>`` or ``GE_RANGE:dataset_n_vars`` to ``0 | ... | n-1``."""
    m = _RANGE_RE.match(token.strip())
    if not m:
        raise MalformedRule(f"not a GE_RANGE token: {token!r}")
    arg = m.group(1)
    if arg == "dataset_n_vars":
        if context is None or context.dataset_n_vars is None:
            raise MissingDatasetContext("GE_RANGE:dataset_n_vars used but no dataset is loaded")
        n = context.dataset_n_vars
    elif arg.isdigit():
        n = int(arg)
    else:
        raise MalformedRule(f"bad GE_RANGE argument {arg!r}")
    if n <= 0:
        raise NonPositiveRange(f"GE_RANGE must be positive, got {n}")
    return [Production((T(str(k)),)) for k in range(n)]


def _split_rules(tokens):
    """Group tokens into (lhs token, body tokens) pairs."""
    if not tokens:
        raise EmptyGrammar("grammar contains no rules")
    starts = [
        k for k in range(len(tokens) - 1)
        if tokens[k].kind == _NT and tokens[k + 1].kind == _DEFINE
    ]
    if not starts or starts[0] != 0:
        tok = tokens[0]
        raise MalformedRule(f"line {tok.line}, column {tok.col}: expected '<name> ::='")
    starts.append(len(tokens))
    for a, b in zip(starts, starts[1:]):
        yield tokens[a], tokens[a + 2:b]


def _parse_alternatives(lhs, body, context):
    alts = [[]]
    for tok in body:
        if tok.kind == _OR:
            alts.append([])
        elif tok.kind == _DEFINE:
            raise MalformedRule(f"line {tok.line}, column {tok.col}: unexpected '::='")
        else:
            alts[-1].append(tok)

    choices = []
    for alt in alts:
        if not alt:
            raise MalformedRule(f"rule <{lhs.text}> (line {lhs.line}) has an empty alternative")
        ranges = [t for t in alt if t.kind == _TERM and not t.quoted and t.text.startswith("GE_RANGE:")]
        if ranges:
            if len(alt) != 1:
                tok = ranges[0]
                raise MalformedRule(
                    f"line {tok.line}, column {tok.col}: GE_RANGE must be a whole alternative"
                )
            choices.extend(expand_ge_range(ranges[0].text, context))
            continue
        choices.append(Production(tuple(
            NT(t.text) if t.kind == _NT else T(t.text) for t in alt
        )))
    return tuple(choices)


def parse_bnf(text: str, context: GrammarContext | None = None) -> Grammar:
    """Parse BNF text and return the analyzed grammar."""
    rules: dict[str, GrammarRule] = {}
    for lhs, body in _split_rules(_tokenize(text)):
        if lhs.text in rules:
            raise DuplicateRule(f"line {lhs.line}: <{lhs.text}> is defined more than once")
        rules[lhs.text] = GrammarRule(lhs.text, _parse_alternatives(lhs, body, context))

    for rule in rules.values():
        for p in rule.choices:
            for name in p.non_terminals:
                if name not in rules:
                    raise UndefinedNonTerminal(f"<{name}> is used in <{rule.lhs}> but never defined")
    return analyze(Grammar(rules, next(iter(rules))))


def load_grammar(path, context: GrammarContext | None = None) -> Grammar:
    """Read a ``.bnf`` file. Bare names are looked up in the bundled grammars."""
    path = resolve_grammar_path(path)
    return parse_bnf(path.read_text(encoding="utf-8"), context)


def resolve_grammar_path(path) -> Path:
    p = Path(path)
    if p.exists():
        return p
    for candidate in (GRAMMARS_DIR / p, GRAMMARS_DIR / p.with_suffix(".bnf")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"grammar file not found: {path}")


# -- analysis ----------------------------------------------------------------

def _reachable(rules):
    """Map each non-terminal to the set of non-terminals it can derive."""
    direct = {
        name: {nt for p in rule.choices for nt in p.non_terminals}
        for name, rule in rules.items()
    }
    reach = {}
    for name in rules:
        seen, todo = set(), list(direct[name])
        while todo:
            nt = todo.pop()
            if nt not in seen:
                seen.add(nt)
                todo.extend(direct[nt])
        reach[name] = seen
    return reach


def analyze(grammar: Grammar) -> Grammar:
    """Compute recursion flags and minimum completion depths."""
    rules = grammar.rules
    inf = float("inf")
    depth = {name: inf for name in rules}

    def prod_depth(p):
        return 1 + max((depth[nt] for nt in p.non_terminals), default=0)

    cap = len(rules) * max(r.num_choices for r in rules.values()) + 1
    for _ in range(cap):
        new = {name: min(prod_depth(p) for p in rule.choices) for name, rule in rules.items()}
        if new == depth:
            break
        depth = new
    stuck = sorted(name for name, d in depth.items() if d == inf)
    if stuck:
        raise NonTerminatingRule(
            "no terminating derivation from " + ", ".join(f"<{s}>" for s in stuck)
        )

    reach = _reachable(rules)
    analyzed = {}
    for name, rule in rules.items():
        choices = tuple(
            replace(
                p,
                is_recursive=any(nt == name or name in reach[nt] for nt in p.non_terminals),
                min_depth=int(prod_depth(p)),
            )
            for p in rule.choices
        )
        analyzed[name] = GrammarRule(name, choices, int(depth[name]))
    return Grammar(analyzed, grammar.start)
