"""Numeric evaluation of expression DAGs.

``Program`` linearises a set of roots into one topologically ordered tape
and evaluates it over numpy arrays, so a whole batch of sample points costs
one pass over the shared subexpressions.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence

import numpy as np

from .nodes import Expr, ExprError, walk


class EvaluationError(ExprError):
    pass


class UnboundVariableError(EvaluationError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class DomainError(EvaluationError):
    """Raised for division by zero, log/sqrt outside the domain, bad powers."""

    def __init__(self, message: str, node: Expr):
        super().__init__(f"{message} in {node}")
        self.node = node


_NUMPY = {
    "neg": np.negative,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


class Program:
    """Evaluate many expressions at once.

    ``names`` fixes the input order; call with an array whose last axis
    matches ``names`` (or a mapping name -> value/array).
    """

    def __init__(self, roots: Sequence[Expr], names: Sequence[str]):
        self.roots = list(roots)
        self.names = tuple(names)
        self.tape = walk(self.roots)
        slot = {id(n): k for k, n in enumerate(self.tape)}
        self._ops = [(n, [slot[id(a)] for a in n.args]) for n in self.tape]
        self._out = [slot[id(r)] for r in self.roots]
        missing = set().union(*(r.free_vars for r in self.roots)) - set(self.names) if self.roots else set()
        self.missing = frozenset(missing)

    def __len__(self):
        return len(self.tape)

    def _inputs(self, values):
        if isinstance(values, Mapping):
            for name in self.missing:
                if name not in values:
                    raise UnboundVariableError(name)
            cols = {k: np.asarray(v, dtype=float) for k, v in values.items()}
            shape = np.broadcast_shapes(*(c.shape for c in cols.values())) if cols else ()
            return cols, shape
        if self.missing:
            raise UnboundVariableError(sorted(self.missing)[0])
        arr = np.asarray(values, dtype=float)
        if arr.shape[-1] != len(self.names):
            raise EvaluationError(f"expected {len(self.names)} input columns, got {arr.shape[-1]}")
        return {name: arr[..., i] for i, name in enumerate(self.names)}, arr.shape[:-1]

    def __call__(self, values) -> np.ndarray:
        """Return an array of shape ``(len(roots),) + batch_shape``."""
        cols, shape = self._inputs(values)
        vals = [None] * len(self.tape)
        with np.errstate(all="ignore"):
            for k, (node, args) in enumerate(self._ops):
                op = node.op
                if op == "const":
                    vals[k] = np.full(shape, node.value)
                    continue
                if op == "var":
                    if node.value not in cols:
                        raise UnboundVariableError(node.value)
                    vals[k] = np.broadcast_to(cols[node.value], shape)
                    continue
                x = [vals[i] for i in args]
                vals[k] = _apply(node, op, x)
        out = np.empty((len(self.roots),) + tuple(shape))
        for j, k in enumerate(self._out):
            out[j] = vals[k]
        return out


def _apply(node, op, x):
    f = _NUMPY.get(op)
    if f is not None:
        return f(*x)
    if op == "div":
        if np.any(x[1] == 0.0):
            raise DomainError("division by zero", node)
        return x[0] / x[1]
    if op == "log":
        if np.any(x[0] <= 0.0):
            raise DomainError("log of non-positive value", node)
        return np.log(x[0])
    if op == "sqrt":
        if np.any(x[0] < 0.0):
            raise DomainError("sqrt of negative value", node)
        return np.sqrt(x[0])
    if op == "pow":
        c = node.args[1].value
        base = x[0]
        if c < 0 and np.any(base == 0.0):
            raise DomainError("division by zero", node)
        if not float(c).is_integer():
            if np.any(base < 0.0):
                raise DomainError("non-integer power of negative value", node)
            return np.power(base, c)
        ci = int(c)
        if ci == 2:
            return base * base
        return np.power(base, float(ci)) if ci < 0 else np.power(base, ci)
    raise EvaluationError(f"unknown node {op!r}")


def evaluate(e: Expr, binding: Mapping[str, float]) -> float:
    """Evaluate ``e`` at a single binding of names to reals."""
    names = tuple(binding)
    values = np.array([binding[k] for k in names], dtype=float)
    return float(Program([e], names)(values)[0])
