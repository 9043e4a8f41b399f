"""Immutable, hash-consed expression trees.

Every node is interned: two structurally identical trees are the same Python
object, so equality is identity and derivative caches can key on ``id``.
``make`` builds nodes verbatim; the lowercase constructors (``add``, ``mul``,
...) fold constants and drop neutral elements on the way.
"""
from __future__ import annotations

import math
import threading

UNARY = ("neg", "sin", "cos", "exp", "log", "sinh", "cosh", "tanh", "sqrt")
BINARY = ("add", "sub", "mul", "div", "pow")
FUNCTIONS = UNARY[1:]


class ExprError(Exception):
    """Base class for expression errors."""


class Expr:
    __slots__ = ("op", "value", "args", "_free", "__weakref__")

    def __init__(self, op, value, args):
        self.op = op
        self.value = value
        self.args = args
        free = set()
        if op == "var":
            free.add(value)
        for a in args:
            free |= a._free
        self._free = frozenset(free)

    @property
    def free_vars(self) -> frozenset:
        return self._free

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def __repr__(self):
        from .printer import to_source

        return f"Expr({to_source(self)!r})"

    def __str__(self):
        from .printer import to_source

        return to_source(self)

    def __reduce__(self):
        return (_rebuild, (self.op, self.value, self.args))

    # operator sugar for building fixtures in Python
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return sub(self, as_expr(o))

    def __rsub__(self, o):
        return sub(as_expr(o), self)

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return div(self, as_expr(o))

    def __rtruediv__(self, o):
        return div(as_expr(o), self)

    def __pow__(self, o):
        return power(self, as_expr(o))

    def __neg__(self):
        return neg(self)


_INTERN: dict = {}
_LOCK = threading.Lock()


def node_count() -> int:
    """Number of distinct nodes ever interned in this process."""
    return len(_INTERN)


def make(op: str, value=None, args: tuple = ()) -> Expr:
    if op == "const":
        value = float(value)
        if not math.isfinite(value):
            raise ExprError(f"non-finite constant {value!r}")
        if value == 0.0:
            value = 0.0  # fold -0.0
    key = (op, value, tuple(id(a) for a in args))
    node = _INTERN.get(key)
    if node is None:
        with _LOCK:
            node = _INTERN.get(key)
            if node is None:
                node = Expr(op, value, tuple(args))
                _INTERN[key] = node
    return node


def _rebuild(op, value, args):
    return make(op, value, args)


def const(v: float) -> Expr:
    return make("const", v)


def var(name: str) -> Expr:
    return make("var", name)


ZERO = const(0.0)
ONE = const(1.0)
TWO = const(2.0)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, str):
        return var(x)
    return const(x)


def _is(e: Expr, v: float) -> bool:
    return e.op == "const" and e.value == v


# -- simplifying constructors -------------------------------------------------


def neg(a: Expr) -> Expr:
    if a.op == "const":
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    if a.op == "mul" and a.args[0].op == "const":
        return mul(const(-a.args[0].value), a.args[1])
    return make("neg", None, (a,))


def add(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if b.op == "neg":
        return sub(a, b.args[0])
    if a.op == "neg":
        return sub(b, a.args[0])
    return make("add", None, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.op == "const" and b.op == "const":
        return const(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if a is b:
        return ZERO
    if b.op == "neg":
        return add(a, b.args[0])
    return make("sub", None, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if b.op == "const" and a.op != "const":
        a, b = b, a
    if a.op == "const":
        if b.op == "const":
            return const(a.value * b.value)
        if a.value == 0.0:
            return ZERO
        if a.value == 1.0:
            return b
        if a.value == -1.0:
            return neg(b)
        if b.op == "mul" and b.args[0].op == "const":
            return mul(const(a.value * b.args[0].value), b.args[1])
        if b.op == "neg":
            return mul(const(-a.value), b.args[0])
    if a.op == "neg" and b.op == "neg":
        return mul(a.args[0], b.args[0])
    if a.op == "neg":
        return neg(mul(a.args[0], b))
    if b.op == "neg":
        return neg(mul(a, b.args[0]))
    return make("mul", None, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    # a zero denominator is kept so evaluation can report it
    if b.op == "const" and b.value != 0.0:
        if a.op == "const":
            return const(a.value / b.value)
        if b.value == 1.0:
            return a
        return mul(const(1.0 / b.value), a)
    if _is(a, 0.0) and not _is(b, 0.0):
        return ZERO
    return make("div", None, (a, b))


def power(a: Expr, b: Expr) -> Expr:
    if b.op != "const":
        raise ExprError("exponent must be a constant")
    c = b.value
    if c == 0.0:
        return ONE
    if c == 1.0:
        return a
    if a.op == "const":
        try:
            v = _const_pow(a.value, c)
        except (ValueError, ZeroDivisionError, OverflowError):
            v = None
        if v is not None:
            return const(v)
    if a.op == "pow" and float(c).is_integer() and float(a.args[1].value).is_integer():
        return make("pow", None, (a.args[0], const(a.args[1].value * c)))
    return make("pow", None, (a, b))


def _const_pow(x: float, c: float):
    if x < 0 and not float(c).is_integer():
        return None
    if x == 0 and c < 0:
        return None
    v = math.pow(x, c)
    return v if math.isfinite(v) else None


_FOLD = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
}


def func(name: str, a: Expr) -> Expr:
    if name == "neg":
        return neg(a)
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    if a.op == "const":
        x = a.value
        try:
            if name in _FOLD:
                return const(_FOLD[name](x))
            if name == "log" and x > 0:
                return const(math.log(x))
            if name == "sqrt" and x >= 0:
                return const(math.sqrt(x))
        except (OverflowError, ExprError):
            pass
    return make(name, None, (a,))


def rebuild(e: Expr, args) -> Expr:
    """Rebuild ``e`` with new children through the simplifying constructors."""
    op = e.op
    if op == "add":
        return add(*args)
    if op == "sub":
        return sub(*args)
    if op == "mul":
        return mul(*args)
    if op == "div":
        return div(*args)
    if op == "pow":
        return power(*args)
    return func(op, args[0])


def walk(roots):
    """Yield every node reachable from ``roots`` once, children before parents."""
    seen = set()
    order = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for a in reversed(node.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return order


def simplify(e: Expr) -> Expr:
    """Constant folding and neutral-element removal, bottom-up."""
    memo = {}
    for node in walk([e]):
        if not node.args:
            memo[id(node)] = node
        else:
            memo[id(node)] = rebuild(node, [memo[id(a)] for a in node.args])
    return memo[id(e)]


def size(e: Expr) -> int:
    """Number of distinct nodes in the DAG below ``e``."""
    return len(walk([e]))
