"""A tiny sandboxed language for the program-maximisation problem.

::

    program := stmt (';' stmt)* [';']
    stmt    := NAME '=' expr | 'repeat' INT '{' program '}' | 'return' expr
    expr    := term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := NUMBER | NAME | '(' expr ')'

Execution is bounded: every assignment, return and loop iteration costs one step,
and values are clamped to ``[-max_magnitude, max_magnitude]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import InterpreterError

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]\w*)|(.))")
KEYWORDS = {"repeat", "return"}


class InterpreterStepLimit(InterpreterError):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class RunOutcome:
    value: float
    steps: int
    truncated: bool = False  # step limit hit
    clamped: bool = False  # some value exceeded max_magnitude


def tokenize(text: str):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        num, name, other = m.groups()
        if num is not None:
            tokens.append(("num", float(num)))
        elif name is not None:
            tokens.append(("kw" if name in KEYWORDS else "name", name))
        elif other is not None:
            if other not in "=;{}()+-*":
                raise InterpreterError(f"unexpected character {other!r}")
            tokens.append(("op", other))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise InterpreterError(f"expected {value or kind}, found {tok[1]!r}")
        self.i += 1
        return tok

    def block(self, closer=None):
        stmts = []
        while True:
            while self.peek() == ("op", ";"):
                self.take()
            if self.peek()[0] is None or self.peek() == ("op", closer):
                return stmts
            stmts.append(self.stmt())
            if self.peek() not in (("op", ";"), ("op", closer), (None, None)):
                raise InterpreterError(f"expected ';', found {self.peek()[1]!r}")

    def stmt(self):
        kind, value = self.peek()
        if (kind, value) == ("kw", "repeat"):
            self.take()
            count = self.take("num")[1]
            if count != int(count) or count < 0:
                raise InterpreterError("repeat count must be a non-negative integer")
            self.take("op", "{")
            body = self.block("}")
            self.take("op", "}")
            return ("repeat", int(count), body)
        if (kind, value) == ("kw", "return"):
            self.take()
            return ("return", self.expr())
        name = self.take("name")[1]
        self.take("op", "=")
        return ("assign", name, self.expr())

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            node = ("*", node, self.factor())
        return node

    def factor(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return ("num", value)
        if kind == "name":
            self.take()
            return ("var", value)
        if (kind, value) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise InterpreterError(f"unexpected token {value!r}")


def parse_program(text: str):
    parser = _Parser(tokenize(text))
    stmts = parser.block()
    if parser.peek()[0] is not None:
        raise InterpreterError(f"unexpected {parser.peek()[1]!r}")
    return stmts


def run_program(text: str, max_steps: int = 10_000, max_magnitude: float = 1e12) -> RunOutcome:
    """Execute a program and return the value of its ``return`` statement.

    When the step budget runs out, the last top-level ``return`` expression
    is evaluated against the variables as they stand and reported as a
    truncated outcome.
    """
    program = parse_program(text)
    returns = [s for s in program if s[0] == "return"]
    if not returns:
        raise InterpreterError("program has no return statement")
    env: dict[str, float] = {}
    state = {"steps": 0, "clamped": False}

    def clamp(v):
        if v > max_magnitude or v < -max_magnitude or v != v:
            state["clamped"] = True
            return max_magnitude if v > 0 else -max_magnitude
        return v

    def ev(node):
        tag = node[0]
        if tag == "num":
            return node[1]
        if tag == "var":
            if node[1] not in env:
                raise InterpreterError(f"variable {node[1]!r} read before assignment")
            return env[node[1]]
        a, b = ev(node[1]), ev(node[2])
        if tag == "+":
            return clamp(a + b)
        if tag == "-":
            return clamp(a - b)
        return clamp(a * b)

    def tick():
        state["steps"] += 1
        if state["steps"] > max_steps:
            raise InterpreterStepLimit("step limit reached")

    def execute(stmts):
        for stmt in stmts:
            if stmt[0] == "assign":
                tick()
                env[stmt[1]] = ev(stmt[2])
            elif stmt[0] == "return":
                tick()
                raise _Return(ev(stmt[1]))
            else:
                for _ in range(stmt[1]):
                    tick()
                    execute(stmt[2])

    try:
        execute(program)
    except _Return as ret:
        return RunOutcome(ret.value, state["steps"], False, state["clamped"])
    except InterpreterStepLimit:
        return RunOutcome(ev(returns[-1][1]), max_steps, True, state["clamped"])
    raise InterpreterError("program finished without returning")
