"""Render expressions back into the input grammar."""
from __future__ import annotations

from .nodes import Expr, walk

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
ATOM = 5


def _prec(e: Expr) -> int:
    if e.op == "const":
        return 3 if e.value < 0 else ATOM
    return _PREC.get(e.op, ATOM)


def _number(v: float) -> str:
    return repr(float(v))


def to_source(e: Expr) -> str:
    """Return text that parses back to a tree with identical values.

    Children of equal precedence on the right of a binary operator are
    always parenthesised, so float rounding order is preserved too.
    """
    out = {}
    for node in walk([e]):
        op = node.op
        if op == "const":
            out[id(node)] = _number(node.value)
        elif op == "var":
            out[id(node)] = node.value
        elif op == "neg":
            (a,) = node.args
            s = out[id(a)]
            out[id(node)] = "-" + (s if _prec(a) >= 3 else f"({s})")
        elif op == "pow":
            a, b = node.args
            sa, sb = out[id(a)], out[id(b)]
            if _prec(a) < ATOM:
                sa = f"({sa})"
            if _prec(b) < 3:
                sb = f"({sb})"
            out[id(node)] = f"{sa}^{sb}"
        elif op in _SYMBOL:
            a, b = node.args
            p = _PREC[op]
            sa, sb = out[id(a)], out[id(b)]
            if _prec(a) < p:
                sa = f"({sa})"
            if _prec(b) <= p:
                sb = f"({sb})"
            out[id(node)] = f"{sa} {_SYMBOL[op]} {sb}"
        else:
            out[id(node)] = f"{op}({out[id(node.args[0])]})"
    return out[id(e)]
