"""Exact symbolic differentiation with a per-owner cache and node budget."""
from __future__ import annotations

import threading

from .nodes import (
    ONE,
    TWO,
    ZERO,
    Expr,
    ExprError,
    add,
    const,
    div,
    func,
    mul,
    neg,
    node_count,
    power,
    sub,
    walk,
)

DEFAULT_NODE_BUDGET = 2_000_000


class NodeBudgetExceeded(ExprError):
    pass


class Differentiator:
    """Caches d(e)/d(var) and counts the nodes its derivatives create.

    One instance per chart; the budget bounds how far symbolic expansion
    may go before the caller should give up on symbolic mode.
    """

    def __init__(self, budget: int = DEFAULT_NODE_BUDGET):
        self.budget = budget
        self.created = 0
        self._cache: dict = {}
        self._lock = threading.Lock()

    def diff(self, e: Expr, name: str) -> Expr:
        if name not in e.free_vars:
            return ZERO
        key = (id(e), name)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        before = node_count()
        result = self._diff(e, name)
        with self._lock:
            self.created += max(0, node_count() - before)
        if self.created > self.budget:
            raise NodeBudgetExceeded(
                f"symbolic derivatives exceeded the node budget ({self.budget}); "
                "the metric is too complex for symbolic mode"
            )
        return result

    def partial(self, e: Expr, names) -> Expr:
        """Iterated partial derivative along ``names`` in order."""
        for name in names:
            e = self.diff(e, name)
        return e

    def _diff(self, root: Expr, name: str) -> Expr:
        cache = self._cache
        for e in walk([root]):
            key = (id(e), name)
            if key in cache:
                continue
            if name not in e.free_vars:
                d = ZERO
            else:
                d = _rule(e, [cache[(id(a), name)][1] for a in e.args], name)
            # keep e alive next to its id
            cache[key] = (e, d)
        return cache[(id(root), name)][1]


def _rule(e: Expr, da, name) -> Expr:
    op = e.op
    if op == "var":
        return ONE if e.value == name else ZERO
    if op == "neg":
        return neg(da[0])
    if op == "add":
        return add(da[0], da[1])
    if op == "sub":
        return sub(da[0], da[1])
    if op == "mul":
        u, v = e.args
        return add(mul(da[0], v), mul(u, da[1]))
    if op == "div":
        u, v = e.args
        return sub(div(da[0], v), div(mul(u, da[1]), power(v, TWO)))
    if op == "pow":
        u, c = e.args
        return mul(mul(c, power(u, const(c.value - 1.0))), da[0])
    u = e.args[0]
    du = da[0]
    if op == "sin":
        return mul(func("cos", u), du)
    if op == "cos":
        return neg(mul(func("sin", u), du))
    if op == "exp":
        return mul(e, du)
    if op == "log":
        return div(du, u)
    if op == "sinh":
        return mul(func("cosh", u), du)
    if op == "cosh":
        return mul(func("sinh", u), du)
    if op == "tanh":
        return mul(sub(ONE, power(e, TWO)), du)
    if op == "sqrt":
        return div(du, mul(TWO, e))
    raise ExprError(f"cannot differentiate node {op!r}")


_DEFAULT = Differentiator()


def differentiate(e: Expr, name: str, order: int = 1) -> Expr:
    """d^order e / d name^order using the shared process-wide cache."""
    for _ in range(order):
        e = _DEFAULT.diff(e, name)
    return e
