"""Recursive-descent parser for the expression grammar.

Precedence, loosest first: ``+ -``, ``* /``, unary minus, ``^`` (right
associative). Identifiers are ``t``, ``x<i>``, ``y<i>``; calls are
``sin cos exp ln sqrt``. Decimal literals are converted exactly to rationals.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import List, NamedTuple

from .core import FUNCTION_TABLE, Expr, Var, power


class ParseError(ValueError):
    """Malformed expression text; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.text = text


class Token(NamedTuple):
    kind: str  # num, name, op, end
    value: str
    offset: int


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    raw = text.encode("utf-8")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            off = len(text[:pos].encode("utf-8")) + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", off, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), len(text[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(Token("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: Token = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.offset, self.text)

    def expect(self, value: str):
        tok = self.peek()
        if tok.kind != "op" or tok.value != value:
            self.error(f"expected {value!r}")
        self.advance()

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            self.error("empty expression")
        e = self.sum()
        if self.peek().kind != "end":
            self.error(f"unexpected token {self.peek().value!r}")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while self.peek().kind == "op" and self.peek().value in "+-":
            op = self.advance().value
            rhs = self.product()
            e = e + rhs if op == "+" else e - rhs
        return e

    def product(self) -> Expr:
        e = self.unary()
        while self.peek().kind == "op" and self.peek().value in "*/":
            tok = self.advance()
            rhs = self.unary()
            if tok.value == "*":
                e = e * rhs
            else:
                if not rhs:
                    self.error("division by zero", tok)
                e = e / rhs
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.value in "-+":
            self.advance()
            e = self.unary()
            return -e if tok.value == "-" else e
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.advance()
            exponent = self.unary()  # right-assoc; allows x^-1
            if not exponent.is_constant:
                self.error("exponent must be a rational constant", tok)
            try:
                return power(base, exponent.constant_value)
            except ZeroDivisionError:
                self.error("division by zero", tok)
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Expr.const(Fraction(tok.value))
        if tok.kind == "op" and tok.value == "(":
            e = self.sum()
            self.expect(")")
            return e
        if tok.kind == "name":
            return self.name(tok)
        if tok.kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected token {tok.value!r}", tok)

    def name(self, tok: Token) -> Expr:
        name = tok.value
        if name in FUNCTION_TABLE:
            self.expect("(")
            arg = self.sum()
            self.expect(")")
            try:
                return FUNCTION_TABLE[name](arg)
            except ArithmeticError as exc:
                self.error(str(exc), tok)
        if self.peek().kind == "op" and self.peek().value == "(":
            self.error(f"unknown function {name!r}", tok)
        if name == "t":
            return Expr.atom(Var("t"))
        m = re.fullmatch(r"([xy])([1-9][0-9]*)", name)
        if m is None:
            self.error(f"unknown identifier {name!r}", tok)
        idx = int(m.group(2))
        if idx > self.n:
            self.error(f"variable index out of range: {name} with n={self.n}", tok)
        return Expr.atom(Var(m.group(1), idx))


def parse(text: str, n: int) -> Expr:
    """Parse ``text`` into a canonical :class:`Expr` over dimension ``n``."""
    if n < 1:
        raise ValueError("ambient dimension n must be at least 1")
    return _Parser(text, n).parse()
