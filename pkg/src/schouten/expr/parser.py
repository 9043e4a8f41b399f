"""Recursive-descent parser for the metric expression language.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

The tree is built verbatim (no simplification) except that exponents are
folded and must reduce to a constant.
"""
from __future__ import annotations

import math
import re

from .nodes import FUNCTIONS, Expr, ExprError, const, make, simplify, var

NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


class ExprSyntaxError(ExprError):
    """Malformed input; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class UnknownFunctionError(ExprSyntaxError):
    pass


class EmptyInputError(ExprSyntaxError):
    pass


def _tokenize(source: str):
    tokens = []
    pos = 0
    end = len(source)
    while pos < end:
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            at = end - len(stripped)
            raise ExprSyntaxError(f"unexpected character {source[at]!r}", _byte(source, at))
        kind = m.lastgroup
        if kind is None:
            break
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


def _byte(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None, cls=ExprSyntaxError):
        tok = tok or self.peek()
        return cls(message, _byte(self.source, tok[2]))

    def expect(self, text):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            found = tok[1] or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.take()

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            right = self.term()
            left = make("add" if op == "+" else "sub", None, (left, right))
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            right = self.factor()
            left = make("mul" if op == "*" else "div", None, (left, right))
        return left

    def factor(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return make("neg", None, (self.factor(),))
        base = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            at = self.peek()
            exponent = simplify(self.factor())
            if not exponent.is_const:
                raise self.error("exponent must reduce to a constant", at)
            return make("pow", None, (base, exponent))
        return base

    def base(self) -> Expr:
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            return const(float(text))
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise self.error(f"unknown function {text!r}", tok, UnknownFunctionError)
                self.take()
                arg = self.expr()
                self.expect(")")
                return make(text, None, (arg,))
            if text in NAMED_CONSTANTS:
                return const(NAMED_CONSTANTS[text])
            return var(text)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        found = text or "end of input"
        raise self.error(f"unexpected {found!r}", tok)


def parse(source: str) -> Expr:
    """Parse one expression. Raises ``ExprSyntaxError`` with a byte offset."""
    if not source.strip():
        raise EmptyInputError("empty expression", 0)
    p = _Parser(source)
    tree = p.expr()
    if p.peek()[0] != "end":
        raise p.error(f"unexpected {p.peek()[1]!r}")
    return tree
