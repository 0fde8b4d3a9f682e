"""Evaluation of arithmetic phenotypes with protected operators.

Phenotypes use Python expression syntax restricted to numbers, ``x[i]``,
``+ - * /``, unary minus and the calls ``pdiv``, ``plog`` and ``psqrt``.
``/`` is protected division as well. Parsing goes through :mod:`ast` and
only the whitelisted node types are accepted; nothing is ever ``eval``-ed.

The same compiled expression can run vectorised over a whole input matrix
or on one row of floats.
"""

from __future__ import annotations

import ast
import math

import numpy as np

from ..errors import ExpressionParseError


def pdiv(a, b):
    with np.errstate(all="ignore"):
        safe = np.where(b == 0, 1.0, b)
        return np.where(b == 0, 1.0, a / safe)


def plog(x):
    with np.errstate(all="ignore"):
        return np.where(x == 0, 0.0, np.log(np.where(x == 0, 1.0, np.abs(x))))


def psqrt(x):
    return np.sqrt(np.abs(x))


def pdiv_scalar(a: float, b: float) -> float:
    return 1.0 if b == 0 else a / b


def plog_scalar(x: float) -> float:
    return 0.0 if x == 0 else math.log(abs(x))


def psqrt_scalar(x: float) -> float:
    return math.sqrt(abs(x))


_VECTOR_CALLS = {"pdiv": (pdiv, 2), "plog": (plog, 1), "psqrt": (psqrt, 1)}
_SCALAR_CALLS = {"pdiv": (pdiv_scalar, 2), "plog": (plog_scalar, 1), "psqrt": (psqrt_scalar, 1)}


def _compile(node, calls, divide):
    if isinstance(node, ast.Expression):
        return _compile(node.body, calls, divide)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        value = float(node.value)
        return lambda x: value
    if isinstance(node, ast.Subscript):
        if not (isinstance(node.value, ast.Name) and node.value.id == "x"):
            raise ExpressionParseError("only x[...] may be indexed")
        index = node.slice
        if not (isinstance(index, ast.Constant) and type(index.value) is int):
            raise ExpressionParseError("variable index must be an integer literal")
        i = index.value
        return lambda x: x[i]
    if isinstance(node, ast.UnaryOp):
        arg = _compile(node.operand, calls, divide)
        if isinstance(node.op, ast.USub):
            return lambda x: -arg(x)
        if isinstance(node.op, ast.UAdd):
            return arg
    if isinstance(node, ast.BinOp):
        left = _compile(node.left, calls, divide)
        right = _compile(node.right, calls, divide)
        op = type(node.op)
        if op is ast.Add:
            return lambda x: left(x) + right(x)
        if op is ast.Sub:
            return lambda x: left(x) - right(x)
        if op is ast.Mult:
            return lambda x: left(x) * right(x)
        if op is ast.Div:
            return lambda x: divide(left(x), right(x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        if node.func.id in calls:
            fn, arity = calls[node.func.id]
            if len(node.args) != arity:
                raise ExpressionParseError(f"{node.func.id} takes {arity} argument(s)")
            args = [_compile(a, calls, divide) for a in node.args]
            if arity == 1:
                a0 = args[0]
                return lambda x: fn(a0(x))
            a0, a1 = args
            return lambda x: fn(a0(x), a1(x))
    raise ExpressionParseError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _parse(text: str):
    try:
        return ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionParseError(f"cannot parse {text!r}: {exc.msg}") from None


def compile_vectorised(text: str):
    """Return ``f(X) -> ndarray`` evaluating ``text`` over every row of ``X``."""
    body = _compile(_parse(text), _VECTOR_CALLS, pdiv)

    def run(X):
        cols = X.T
        try:
            with np.errstate(all="ignore"):
                out = body(cols)
        except IndexError:
            raise ExpressionParseError(f"variable index out of range in {text!r}") from None
        return np.broadcast_to(np.asarray(out, dtype=float), (X.shape[0],))

    return run


def compile_scalar(text: str):
    """Return ``f(row) -> float`` evaluating ``text`` on a single input row."""
    body = _compile(_parse(text), _SCALAR_CALLS, pdiv_scalar)

    def run(row):
        try:
            return float(body(row))
        except IndexError:
            raise ExpressionParseError(f"variable index out of range in {text!r}") from None
        except OverflowError:
            return math.inf

    return run


def evaluate(text: str, X) -> np.ndarray:
    return compile_vectorised(text)(np.asarray(X, dtype=float))


def evaluate_rows(text: str, X) -> np.ndarray:
    f = compile_scalar(text)
    return np.array([f(list(row)) for row in np.asarray(X, dtype=float)])
