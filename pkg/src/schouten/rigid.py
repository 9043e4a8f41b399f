"""Builders for the rigid Schouten solitons R^(n-k) x N^k.

N^k is Einstein with scalar curvature

    R_N = 2(n-1) k lambda / (2(n-1) - k)

and the potential is f = (R_N / (2(n-1)) + lambda) |x|^2 / 2 on the flat
factor. Only constant-curvature N are built (round spheres, hyperbolic
spaces); quotients are not modelled since every check here is local.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import ZERO, Expr, const, func, mul, power, var
from .geometry import Chart
from .soliton import SolitonData

COLATITUDE_MARGIN = 0.2
FLAT_HALF_WIDTH = 2.0


class RigidSpecError(ValueError):
    pass


@dataclass(frozen=True)
class RigidSpec:
    n: int
    k: int
    lam: float
    factor: str = "auto"  # "sphere", "hyperbolic", "none" or "auto"
    flat_scale: float = 1.0  # chart x = flat_scale * u on the flat factor

    def __post_init__(self):
        if self.n < 3:
            raise RigidSpecError("total dimension must be at least 3")
        if not 0 <= self.k <= self.n:
            raise RigidSpecError(f"need 0 <= k <= n, got k={self.k}")
        if self.lam == 0:
            raise RigidSpecError("lambda must be nonzero")
        if self.flat_scale <= 0:
            raise RigidSpecError("flat_scale must be positive")

    @property
    def einstein_curvature(self) -> float:
        """Scalar curvature of the Einstein factor (and of the whole product)."""
        n, k = self.n, self.k
        return 2 * (n - 1) * k * self.lam / (2 * (n - 1) - k)

    @property
    def potential_coefficient(self) -> float:
        """c in f = c |x|^2 / 2."""
        return self.einstein_curvature / (2 * (self.n - 1)) + self.lam

    @property
    def resolved_factor(self) -> str:
        if self.k == 0:
            return "none"
        if self.factor != "auto":
            return self.factor
        return "sphere" if self.einstein_curvature > 0 else "hyperbolic"


def _sphere(k: int, radius: float, prefix: str = "t"):
    """Nested colatitudes t1..t(k-1) and a longitude; metric of S^k(radius)."""
    coords = [f"{prefix}{i + 1}" for i in range(k - 1)] + ["phi"]
    diag = []
    weight: Expr = const(radius**2)
    for i, c in enumerate(coords):
        diag.append(weight)
        if i < k - 1:
            weight = mul(weight, power(func("sin", var(c)), const(2)))
    domain = [(COLATITUDE_MARGIN, math.pi - COLATITUDE_MARGIN)] * (k - 1) + [(-math.pi, math.pi)]
    return coords, diag, domain


def _hyperbolic(k: int, radius: float):
    """Upper half-space model of H^k(radius): (radius/y)^2 (dx^2 + dy^2)."""
    coords = [f"h{i + 1}" for i in range(k - 1)] + ["y"]
    w = mul(const(radius**2), power(var("y"), const(-2)))
    domain = [(-1.0, 1.0)] * (k - 1) + [(0.5, 2.0)]
    return coords, [w] * k, domain


def build_rigid(spec: RigidSpec) -> SolitonData:
    n, k, lam = spec.n, spec.k, spec.lam
    rn = spec.einstein_curvature
    kind = spec.resolved_factor
    if k == 1:
        raise RigidSpecError("a one-dimensional factor cannot carry nonzero scalar curvature")
    if k >= 2:
        if kind == "sphere" and rn <= 0:
            raise RigidSpecError(f"a sphere factor needs R_N > 0, got {rn:.6g}")
        if kind == "hyperbolic" and rn >= 0:
            raise RigidSpecError(f"a hyperbolic factor needs R_N < 0, got {rn:.6g}")
        if kind not in ("sphere", "hyperbolic"):
            raise RigidSpecError(f"unknown factor kind {spec.factor!r}")
    radius = math.sqrt(k * (k - 1) / abs(rn)) if k >= 2 else 0.0

    m = n - k
    s = spec.flat_scale
    flat = [f"x{i + 1}" for i in range(m)]
    coords = list(flat)
    diag = [const(s * s)] * m
    domain = [(-FLAT_HALF_WIDTH / s, FLAT_HALF_WIDTH / s)] * m
    if k >= 2:
        fc, fd, fdom = _sphere(k, radius) if kind == "sphere" else _hyperbolic(k, radius)
        coords += fc
        diag += fd
        domain += fdom
    g = [[diag[i] if i == j else ZERO for j in range(n)] for i in range(n)]

    c = spec.potential_coefficient
    f: Expr = ZERO
    if m:
        sq = ZERO
        for x in flat:
            sq = sq + power(var(x), const(2))
        f = mul(const(0.5 * c * s * s), sq)

    if k == 0:
        label = "gaussian"
    elif k == n:
        label = "einstein"
    elif k == n - 1:
        label = "cylinder"
    else:
        label = "product"
    name = f"{label}:n={n},k={k},lambda={lam:g}"
    chart = Chart(coords, g, domain, name=name)
    return SolitonData(chart, f, lam, f0=0.0, kind=label, meta={"rigid": spec})


def gaussian(n: int, lam: float = 1.0, flat_scale: float = 1.0) -> SolitonData:
    return build_rigid(RigidSpec(n, 0, lam, "none", flat_scale))


def cylinder(n: int, lam: float = 1.0, flat_scale: float = 1.0) -> SolitonData:
    return build_rigid(RigidSpec(n, n - 1, lam, "auto", flat_scale))


def einstein(n: int, lam: float = 1.0) -> SolitonData:
    return build_rigid(RigidSpec(n, n, lam))


def expected_slope(spec: RigidSpec) -> tuple[float, float]:
    """Slope of |grad f|^2 along the normalised gradient curve, and
    the product (b' - 2 lambda)(b' - 4 lambda) for that slope."""
    n, k, lam = spec.n, spec.k, spec.lam
    if k > n - 1:
        raise RigidSpecError("the potential is constant when k = n")
    d = 2 * (n - 1) - k
    slope = 4 * (n - 1) * lam / d
    product = -8 * k * (n - 1 - k) * lam**2 / d**2
    return slope, product


def perturbed_gaussian(n: int, lam: float = 1.0, eps: float = 0.01) -> SolitonData:
    """Flat R^n with the Gaussian potential scaled by (1 + eps).

    Hess f = (1 + eps) lambda g, so the soliton equation is off by eps lambda g;
    a negative control.
    """
    sd = gaussian(n, lam)
    chart = sd.chart
    chart.name = f"perturbed-gaussian:n={n},lambda={lam:g},eps={eps:g}"
    return SolitonData(chart, mul(const(1.0 + eps), sd.f), lam, f0=0.0, kind="perturbed")
