"""Recursive-descent parser for coefficient expressions.

Grammar, by increasing binding power:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)*          exponent must fold to a rational
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Binary operators of equal precedence associate to the left.  Variables are
named u1..un, with r1..rn accepted as aliases; pi and e denote the usual
constants; function names are exp, ln, sin, cos, sqrt.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import ParseError
from .exprs import BinOp, Call, Const, Expr, NamedConst, Neg, Power, Var, FUNCTIONS

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_CONSTANTS = {"pi": math.pi, "e": math.e}


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        for kind in ("number", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], n: int, length: int):
        self.tokens = tokens
        self.n = n
        self.i = 0
        self.length = length

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def expect_op(self, text: str):
        tok = self.next()
        if tok is None:
            raise ParseError(f"expected {text!r}, found end of input", self.length)
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.pos)

    # precedence levels, loosest first
    def expr(self) -> Expr:
        node = self.term()
        while (tok := self.peek()) is not None and tok.kind == "op" and tok.text in "+-":
            self.next()
            node = BinOp(tok.text, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while (tok := self.peek()) is not None and tok.kind == "op" and tok.text in "*/":
            self.next()
            node = BinOp(tok.text, node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        while (tok := self.peek()) is not None and tok.kind == "op" and tok.text == "^":
            self.next()
            at = self.peek().pos if self.peek() is not None else self.length
            node = Power(node, _fold_rational(self.exponent_atom(), at))
        return node

    def exponent_atom(self) -> Expr:
        # a sign-prefixed atom: chained '^' is handled by the loop in power(),
        # keeping equal-precedence operators left-associative
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.next()
            return Neg(self.exponent_atom())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.next()
        if tok is None:
            raise ParseError("unexpected end of input", self.length)
        if tok.kind == "number":
            return Const(Fraction(tok.text))
        if tok.kind == "ident":
            return self.ident(tok)
        if tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {tok.text!r}", tok.pos)

    def ident(self, tok) -> Expr:
        name = tok.text
        if name in FUNCTIONS:
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return Call(name, arg)
        if name in _CONSTANTS:
            return NamedConst(name, _CONSTANTS[name])
        m = re.fullmatch(r"[ur](\d+)", name)
        if m:
            index = int(m.group(1))
            if not 1 <= index <= self.n:
                raise ParseError(
                    f"variable {name!r} out of range for dimension {self.n}", tok.pos
                )
            return Var(index - 1)
        raise ParseError(f"unknown identifier {name!r}", tok.pos)


def _fold_rational(e: Expr, pos: int) -> Fraction:
    """Constant-fold an exponent subtree to an exact rational."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Neg):
        return -_fold_rational(e.arg, pos)
    if isinstance(e, BinOp):
        left = _fold_rational(e.left, pos)
        right = _fold_rational(e.right, pos)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if right == 0:
            raise ParseError("division by zero in exponent", pos)
        return left / right
    if isinstance(e, Power) and e.exponent.denominator == 1 and e.exponent >= 0:
        return _fold_rational(e.base, pos) ** int(e.exponent)
    raise ParseError("exponent must be a constant rational", pos)


def parse_expr(text: str, n: int) -> Expr:
    """Parse expression text over variables u1..un (aliases r1..rn)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    tokens = _tokenize(text)
    parser = _Parser(tokens, n, len(text))
    node = parser.expr()
    trailing = parser.peek()
    if trailing is not None:
        raise ParseError(f"unexpected token {trailing.text!r}", trailing.pos)
    return node
