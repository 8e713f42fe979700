"""Arithmetic expressions over token counts.

Used to write transfer functions in model files, e.g.::

    if table.temperature <= 30 then 0 else 0.1 * table.temperature

Precedence, loosest first: ``if/then/else``, comparisons, ``+ -``,
``* /``, unary minus. Binary operators associate left. Comparisons
evaluate to 1.0 or 0.0; ``if`` takes the first branch when its condition
is non-zero.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .dsl import lookup
from .errors import DivisionByZero, UnknownOperator
from .lexer import TokenStream, tokenize
from .rules import COMPARATORS, fmt_number


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Ref:
    place: str
    token: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IfElse:
    cond: "Expr"
    then: "Expr"
    otherwise: "Expr"


Expr = Union[Num, Ref, Neg, BinOp, IfElse]

_ARITH = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
}


class _Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(text, tokenize(text))

    def _keyword(self, word: str) -> bool:
        # a keyword never precedes '.', so places may still be named "if"
        ts = self.ts
        return ts.at("name", word) and not (ts.peek(1).kind == "punct" and ts.peek(1).value == ".")

    def expr(self) -> Expr:
        if self._keyword("if"):
            self.ts.next()
            cond = self.expr()
            if not self._keyword("then"):
                self.ts.error("expected 'then'")
            self.ts.next()
            then = self.expr()
            if not self._keyword("else"):
                self.ts.error("expected 'else'")
            self.ts.next()
            return IfElse(cond, then, self.expr())
        return self.comparison()

    def comparison(self) -> Expr:
        node = self.additive()
        while self.ts.at("cmp"):
            tok = self.ts.peek()
            if tok.value not in COMPARATORS:
                self.ts.error(f"unknown operator {tok.value!r}", tok, UnknownOperator)
            self.ts.next()
            node = BinOp(tok.value, node, self.additive())
        return node

    def additive(self) -> Expr:
        node = self.term()
        while self.ts.at("op", "+") or self.ts.at("op", "-"):
            op = self.ts.next().value
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.ts.at("op", "*") or self.ts.at("op", "/"):
            op = self.ts.next().value
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.ts.at("op", "-"):
            self.ts.next()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "num":
            ts.next()
            return Num(float(tok.value))
        if tok.kind == "name" and not self._keyword("if"):
            ts.next()
            ts.expect("punct", ".", f"'.' after place name {tok.value!r}")
            return Ref(tok.value, ts.expect("name", None, "a token name").value)
        if ts.at("punct", "("):
            ts.next()
            node = self.expr()
            ts.expect("punct", ")", "')'")
            return node
        ts.error(f"expected a number, a place.token reference or '(', found "
                 f"{tok.value or 'end of input'!r}")


def parse_expression(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    p.ts.expect_end()
    return node


def eval_expression(expr: Expr, snapshot: Mapping) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Ref):
        return float(lookup(snapshot, expr.place, expr.token))
    if isinstance(expr, Neg):
        return -eval_expression(expr.operand, snapshot)
    if isinstance(expr, IfElse):
        branch = expr.then if eval_expression(expr.cond, snapshot) != 0 else expr.otherwise
        return eval_expression(branch, snapshot)
    left = eval_expression(expr.left, snapshot)
    right = eval_expression(expr.right, snapshot)
    if expr.op == "/":
        if right == 0:
            raise DivisionByZero("division by zero")
        return left / right
    if expr.op in COMPARATORS:
        return 1.0 if COMPARATORS[expr.op](left, right) else 0.0
    return _ARITH[expr.op](left, right)


def format_expression(expr: Expr) -> str:
    """Render fully parenthesized text that parses back to ``expr``."""
    if isinstance(expr, Num):
        if not math.isfinite(expr.value) or expr.value < 0:
            raise ValueError(f"literal {expr.value} has no source form")
        return fmt_number(expr.value)
    if isinstance(expr, Ref):
        return f"{expr.place}.{expr.token}"
    if isinstance(expr, Neg):
        return f"-{format_expression(expr.operand)}"
    if isinstance(expr, IfElse):
        return (f"(if {format_expression(expr.cond)} then {format_expression(expr.then)} "
                f"else {format_expression(expr.otherwise)})")
    return f"({format_expression(expr.left)} {expr.op} {format_expression(expr.right)})"


def references(expr: Expr) -> Iterator[Ref]:
    if isinstance(expr, Ref):
        yield expr
    elif isinstance(expr, Neg):
        yield from references(expr.operand)
    elif isinstance(expr, BinOp):
        yield from references(expr.left)
        yield from references(expr.right)
    elif isinstance(expr, IfElse):
        for part in (expr.cond, expr.then, expr.otherwise):
            yield from references(part)


class ExpressionFunction:
    """Transfer function backed by a parsed expression."""

    def __init__(self, text: str):
        self.text = text
        self.expr = parse_expression(text)

    def __call__(self, places: Mapping) -> float:
        return eval_expression(self.expr, places)

    def __repr__(self) -> str:
        return f"ExpressionFunction({self.text!r})"
