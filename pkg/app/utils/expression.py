"""Arithmetic expressions over the variable "s" for user-supplied nonlinearities.

Grammar (pyparsing infix notation, highest precedence first):
    ^            right-associative power
    unary + -
    * /
    + -
Functions: sqrt, atan, sin, cos, exp, log, tanh.  Constants: pi, e, r0.

    >>> fn = compile_expression("(1+r0^2)/(1+s) - 1", r0=1.0)
    >>> fn(np.array([1.0]))
    array([0.])
"""
from __future__ import annotations

import logging
import operator
from typing import Callable

import numpy as np
import pyparsing as pp

from app.errors import ValidationError

logger = logging.getLogger(__name__)

Evaluator = Callable[[dict], np.ndarray]

_FUNCS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sqrt": np.sqrt,
    "atan": np.arctan,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "tanh": np.tanh,
}

_BINARY = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "^": operator.pow,
}


# ── Parse actions: every node becomes a callable env -> value ───────────────

def _number(tokens) -> Evaluator:
    value = float(tokens[0])
    return lambda env: value


def _name(tokens) -> Evaluator:
    name = tokens[0]
    if name in _FUNCS:
        raise pp.ParseFatalException(f"function '{name}' used without arguments")
    return lambda env: env[name]


def _call(tokens) -> Evaluator:
    name, arg = tokens[0], tokens[1]
    if name not in _FUNCS:
        raise pp.ParseFatalException(f"unknown function '{name}'")
    fn = _FUNCS[name]
    return lambda env: fn(arg(env))


def _unary(tokens) -> Evaluator:
    op, arg = tokens[0][0], tokens[0][1]
    if op == "-":
        return lambda env: -arg(env)
    return arg


def _left(tokens) -> Evaluator:
    items = list(tokens[0])

    def evaluate(env):
        acc = items[0](env)
        for op, rhs in zip(items[1::2], items[2::2]):
            acc = _BINARY[op](acc, rhs(env))
        return acc

    return evaluate


def _right(tokens) -> Evaluator:
    items = list(tokens[0])

    def evaluate(env):
        acc = items[-1](env)
        for op, lhs in zip(reversed(items[1::2]), reversed(items[:-2:2])):
            acc = _BINARY[op](lhs(env), acc)
        return acc

    return evaluate


def _build_grammar() -> pp.ParserElement:
    number = pp.Regex(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?").set_parse_action(_number)
    ident = pp.Word(pp.alphas, pp.alphanums + "_")
    expr = pp.Forward()
    call = (ident + pp.Suppress("(") + expr + pp.Suppress(")")).set_parse_action(_call)
    name = ident.copy().set_parse_action(_name)
    operand = call | number | name
    expr <<= pp.infix_notation(
        operand,
        [
            ("^", 2, pp.OpAssoc.RIGHT, _right),
            (pp.one_of("+ -"), 1, pp.OpAssoc.RIGHT, _unary),
            (pp.one_of("* /"), 2, pp.OpAssoc.LEFT, _left),
            (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _left),
        ],
    )
    return expr + pp.StringEnd()


_GRAMMAR: pp.ParserElement | None = None


def _grammar() -> pp.ParserElement:
    global _GRAMMAR
    if _GRAMMAR is None:
        _GRAMMAR = _build_grammar()
    return _GRAMMAR


def compile_expression(text: str, r0: float) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression string into a vectorised function of s."""
    try:
        tree: Evaluator = _grammar().parse_string(text, parse_all=True)[0]
    except (pp.ParseException, pp.ParseFatalException) as exc:
        raise ValidationError(f"cannot parse expression {text!r}: {exc}", expression=text)

    constants = {"pi": np.pi, "e": np.e, "r0": float(r0)}

    def fn(s):
        s = np.asarray(s, dtype=float)
        env = dict(constants, s=s)
        try:
            with np.errstate(all="ignore"):
                return np.broadcast_to(np.asarray(tree(env), dtype=float), s.shape).copy()
        except KeyError as exc:
            raise ValidationError(
                f"unknown variable {exc.args[0]!r} in {text!r}", expression=text
            ) from None

    logger.debug("Compiled expression %r", text)
    return fn
