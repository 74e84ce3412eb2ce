"""Recursive-descent parser for the infix expression grammar.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := atom ("^" exponent)?
    exponent:= ("-" | "+") exponent | power
    atom    := INT | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Exponents must reduce to integer constants.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from ..errors import ParseError
from . import expr as E

__all__ = ["parse", "FUNCTIONS"]

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)

FUNCTIONS = {
    "sin": (1, E.sin),
    "cos": (1, E.cos),
    "sinh": (1, E.sinh),
    "cosh": (1, E.cosh),
    "Sk": (2, E.tag_s),
    "Ck": (2, E.tag_c),
    "Tk": (2, E.tag_t),
}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos] == ".":
                raise ParseError("decimal literals are not supported, use a ratio like 1/2", pos, text)
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, parameters: frozenset[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.parameters = parameters

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {what}", pos, self.text)

    def error(self, message: str, pos: int | None = None):
        if pos is None:
            pos = self.peek()[2]
        raise ParseError(message, pos, self.text)

    def parse(self) -> E.Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> E.Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else E.neg(t))
        return E.add(*terms) if len(terms) > 1 else terms[0]

    def term(self) -> E.Expr:
        acc = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "*":
                acc = E.mul(acc, rhs)
            else:
                if rhs == E.ZERO:
                    self.error("division by zero", pos)
                acc = E.div(acc, rhs)
        return acc

    def unary(self) -> E.Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return E.neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> E.Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            epos = self.peek()[2]
            exponent = self.exponent()
            if not (isinstance(exponent, E.Const) and exponent.value.denominator == 1):
                self.error("exponent must be an integer constant", epos)
            try:
                return E.power(base, int(exponent.value))
            except ZeroDivisionError:
                self.error("zero raised to a negative power", pos)
        return base

    def exponent(self) -> E.Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return E.neg(self.exponent())
        if kind == "op" and val == "+":
            self.take()
            return self.exponent()
        return self.power()

    def atom(self) -> E.Expr:
        kind, val, pos = self.take()
        if kind == "int":
            return E.const(Fraction(int(val)))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(val, pos)
            if val in FUNCTIONS:
                self.error(f"function {val!r} needs arguments", pos)
            return E.Param(val) if val in self.parameters else E.Var(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        what = "end of input" if kind == "end" else repr(val)
        self.error(f"unexpected {what}", pos)

    def call(self, name: str, pos: int) -> E.Expr:
        if name not in FUNCTIONS:
            self.error(f"unknown function {name!r}", pos)
        arity, build = FUNCTIONS[name]
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == "," and self.peek()[0] == "op":
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != arity:
            self.error(f"{name} takes {arity} argument(s), got {len(args)}", pos)
        return build(*args)


def parse(text: str, parameters: Iterable[str] = ()) -> E.Expr:
    """Parse ``text`` into a canonical expression.

    Identifiers listed in ``parameters`` become :class:`Param` nodes, every
    other identifier a :class:`Var`.

    >>> str(parse("x + x"))
    '2*x'
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text, frozenset(parameters)).parse()
