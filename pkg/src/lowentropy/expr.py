"""Tiny arithmetic grammar for graph height functions.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | name | func '(' expr ')' | '(' expr ')'

Names are the coordinates ``x`` and ``y`` and the constants ``pi`` and
``e``; functions are ``sin``, ``cos`` and ``exp``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
CONSTS = {"pi": math.pi, "e": math.e}
VARS = ("x", "y")

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")


class ExprError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.message = message
        self.column = column


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Name, Neg, BinOp, Call]

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3


def format_real(v: float) -> str:
    """Shortest string that reads back as the same double; integral values
    drop the trailing ``.0``."""
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v!r}")
    s = repr(v)
    return s[:-2] if s.endswith(".0") else s


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprError(f"unexpected character {text[col]!r}", col + 1)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        tok = m.group(m.lastindex)
        out.append((kind, "^" if tok == "**" else tok, start + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, tok, col = self.take()
        if tok != value or kind != "op":
            raise ExprError(f"expected {value!r}", col)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            node = BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, tok, col = self.take()
        if kind == "num":
            return Num(float(tok))
        if kind == "name":
            if tok in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok, arg)
            if tok in CONSTS or tok in VARS:
                return Name(tok)
            raise ExprError(f"unknown name {tok!r}", col)
        if tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError("expected a number, name or '('" if kind != "end" else "unexpected end of expression", col)


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    kind, tok, col = p.peek()
    if kind != "end":
        raise ExprError(f"unexpected {tok!r}", col)
    return node


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return 5


def unparse(node: Expr) -> str:
    """Canonical text; parentheses only where the grammar needs them."""
    if isinstance(node, Num):
        return format_real(node.value)
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    if isinstance(node, Neg):
        inner = unparse(node.arg)
        return f"-({inner})" if _prec(node.arg) < _NEG_PREC else f"-{inner}"
    p = _PREC[node.op]
    left, right = unparse(node.left), unparse(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p and not isinstance(node.right, Neg):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def evaluate(node: Expr, **coords):
    """Evaluate with numpy broadcasting over the coordinate arrays."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        if node.name in CONSTS:
            return CONSTS[node.name]
        if node.name not in coords:
            raise ValueError(f"variable {node.name!r} is not defined here")
        return coords[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, **coords)
    if isinstance(node, Call):
        return FUNCS[node.func](evaluate(node.arg, **coords))
    a, b = evaluate(node.left, **coords), evaluate(node.right, **coords)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def variables(node: Expr) -> set:
    if isinstance(node, Name):
        return {node.name} if node.name in VARS else set()
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set()
