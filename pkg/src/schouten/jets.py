"""Truncated derivative jets of tensor fields at a batch of points.

A ``Jet`` of order m stores a tensor field T and all its coordinate partial
derivatives up to order m::

    parts[k].shape == (P,) + base_shape + (n,) * k

where P is the number of points and the trailing k axes are the (fully
symmetric) derivative indices. Products follow the Leibniz rule, so the
whole curvature pipeline can run on numbers once the metric jet is known.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

_DERIV = "ABCDEFGH"


class Jet:
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = list(parts)

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def rank(self) -> int:
        return self.parts[0].ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"jet of order {self.order} cannot supply order {order}")
        return Jet(self.parts[: order + 1])

    def __add__(self, other: "Jet") -> "Jet":
        m = min(self.order, other.order)
        return Jet([self.parts[k] + other.parts[k] for k in range(m + 1)])

    def __sub__(self, other: "Jet") -> "Jet":
        m = min(self.order, other.order)
        return Jet([self.parts[k] - other.parts[k] for k in range(m + 1)])

    def __mul__(self, c: float) -> "Jet":
        return Jet([c * p for p in self.parts])

    __rmul__ = __mul__

    def __neg__(self) -> "Jet":
        return Jet([-p for p in self.parts])


def constant_jet(value: np.ndarray, n: int, order: int) -> Jet:
    """Jet of a field that does not vary (e.g. a Kronecker delta)."""
    parts = [np.asarray(value, dtype=float)]
    for k in range(1, order + 1):
        parts.append(np.zeros(parts[0].shape + (n,) * k))
    return Jet(parts)


def _leibniz(spec_a: str, spec_b: str, out: str, pa, pb, m: int):
    """Sum over splits of m derivative slots between the two factors."""
    d = _DERIV[:m]
    total = None
    for k in range(m + 1):
        for subset in combinations(range(m), k):
            rest = [i for i in range(m) if i not in subset]
            da = "".join(d[i] for i in subset)
            db = "".join(d[i] for i in rest)
            term = np.einsum(f"...{spec_a}{da},...{spec_b}{db}->...{out}{d}", pa[k], pb[m - k])
            total = term if total is None else total + term
    return total


def contract(spec: str, a: Jet, b: Jet, order: int | None = None) -> Jet:
    """Jet of ``einsum(spec, a, b)`` over base indices (lowercase letters)."""
    ins, out = spec.split("->")
    sa, sb = ins.split(",")
    m = min(a.order, b.order) if order is None else order
    return Jet([_leibniz(sa, sb, out, a.parts, b.parts, k) for k in range(m + 1)])


def permute(a: Jet, src: str, dst: str) -> Jet:
    """Rearrange base indices, e.g. permute(j, 'ijk', 'jik')."""
    parts = []
    for k, p in enumerate(a.parts):
        d = _DERIV[:k]
        parts.append(np.einsum(f"...{src}{d}->...{dst}{d}", p))
    return Jet(parts)


def deriv(a: Jet) -> Jet:
    """Jet of the partial-derivative field: new base index in front."""
    if a.order < 1:
        raise ValueError("need a jet of order >= 1 to differentiate")
    r = a.rank
    return Jet([np.moveaxis(p, 1 + r, 1) for p in a.parts[1:]])


def inverse(g: Jet) -> Jet:
    """Jet of the matrix inverse, from d^m(g g^-1) = 0 order by order."""
    ginv0 = np.linalg.inv(g.parts[0])
    parts = [ginv0]
    for m in range(1, g.order + 1):
        d = _DERIV[:m]
        acc = None
        for k in range(1, m + 1):
            for subset in combinations(range(m), k):
                rest = [i for i in range(m) if i not in subset]
                da = "".join(d[i] for i in subset)
                db = "".join(d[i] for i in rest)
                term = np.einsum(f"...ij{da},...jk{db}->...ik{d}", g.parts[k], parts[m - k])
                acc = term if acc is None else acc + term
        parts.append(-np.einsum(f"...li,...ik{d}->...lk{d}", ginv0, acc))
    return Jet(parts)


def covariant(t: Jet, variance: str, gamma: Jet) -> Jet:
    """Levi-Civita covariant derivative; the new lower index comes first.

    ``variance`` has one character per base slot of ``t``: 'l' lower, 'u' upper.
    ``gamma`` holds Christoffel symbols with base indices (k, i, j) = G^k_ij.
    """
    r = t.rank
    if len(variance) != r:
        raise ValueError(f"variance {variance!r} does not match rank {r}")
    letters = "bcdefghijk"[:r]
    result = deriv(t)
    for s, v in enumerate(variance):
        swapped = letters[:s] + "p" + letters[s + 1 :]
        if v == "l":
            term = contract(f"pa{letters[s]},{swapped}->a{letters}", gamma, t)
            result = result - term
        elif v == "u":
            term = contract(f"{letters[s]}ap,{swapped}->a{letters}", gamma, t)
            result = result + term
        else:
            raise ValueError(f"bad variance character {v!r}")
    return result
