"""Metric data, connection and curvature of a single coordinate chart.

Sign convention (pinned by the sphere and 3-d Weyl calibrations):

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R_ijkl   = g(R(d_i, d_j) d_l, d_k)          so R_ijij = sec(d_i, d_j) |d_i ^ d_j|^2
    R_jl     = g^ik R_ijkl                      so the unit 2-sphere has R = +2

All heavy lifting happens on ``Jet`` objects batched over sample points; the
pointwise functions below are thin wrappers with a batch of one.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations

import numpy as np

from . import jets
from .expr import Differentiator, Expr, Program, as_expr, parse, simplify
from .jets import Jet

DEFAULT_SEED = 0x5EED
DEFAULT_SAMPLES = 50
FD_STEP = 1e-3


class GeometryError(Exception):
    pass


class MalformedChartError(GeometryError):
    pass


class DegenerateMetricError(GeometryError):
    pass


class DomainBoxError(GeometryError):
    pass


def _as_expr(x) -> Expr:
    if isinstance(x, str):
        return simplify(parse(x))
    return simplify(as_expr(x))


class Chart:
    """A single coordinate chart with metric components given as expressions.

    ``g`` is an n-by-n nested sequence of ``Expr`` or source strings.
    ``params`` binds named constants that may appear in the expressions.
    """

    def __init__(self, coords, g, domain, params: Mapping[str, float] | None = None,
                 name: str = "chart", node_budget: int | None = None):
        self.coords = tuple(coords)
        n = len(self.coords)
        if n < 2:
            raise MalformedChartError("chart dimension must be at least 2")
        if len(set(self.coords)) != n:
            raise MalformedChartError("coordinate names must be unique")
        if len(g) != n or any(len(row) != n for row in g):
            raise MalformedChartError(f"metric must be {n}x{n}")
        if len(domain) != n:
            raise MalformedChartError(f"domain needs {n} intervals")
        self.g = tuple(tuple(_as_expr(c) for c in row) for row in g)
        self.domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        for lo, hi in self.domain:
            if not lo < hi:
                raise DomainBoxError(f"empty domain interval [{lo}, {hi}]")
        self.params = dict(params or {})
        clash = set(self.params) & set(self.coords)
        if clash:
            raise MalformedChartError(f"names used as both coordinate and parameter: {sorted(clash)}")
        self.name = name
        self.diff = Differentiator() if node_budget is None else Differentiator(node_budget)
        self._programs: dict = {}

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def names(self) -> tuple:
        return self.coords + tuple(self.params)

    def __repr__(self):
        return f"Chart({self.name!r}, n={self.n}, coords={self.coords})"

    # -- evaluation helpers ------------------------------------------------

    def _inputs(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != self.n:
            raise GeometryError(f"points need {self.n} coordinates, got {points.shape[-1]}")
        if not self.params:
            return points
        extra = np.broadcast_to(np.array(list(self.params.values())), points.shape[:-1] + (len(self.params),))
        return np.concatenate([points, extra], axis=-1)

    def field_jet(self, components, points, order: int) -> Jet:
        """Symbolic jet of an expression-valued tensor field at ``points``.

        ``components`` is a (nested) array of ``Expr`` of any shape.
        """
        comps = np.asarray(components, dtype=object)
        base = comps.shape
        flat = [_as_expr(c) for c in comps.ravel()]
        key = ("field", tuple(id(c) for c in flat), order)
        prog = self._programs.get(key)
        if prog is None:
            prog = self._build_jet_program(flat, order)
            self._programs[key] = prog
        program, layout = prog
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        values = program(self._inputs(pts))  # (roots, P)
        P = pts.shape[0]
        n = self.n
        parts = []
        for k in range(order + 1):
            arr = np.empty((P, len(flat)) + (n,) * k)
            for multi, rows in layout[k]:
                vals = values[rows].T  # (P, comps)
                for perm in set(permutations(multi)):
                    arr[(slice(None), slice(None)) + perm] = vals
            parts.append(arr.reshape((P,) + base + (n,) * k))
        return Jet(parts)

    def _build_jet_program(self, flat, order):
        roots = []
        layout = []
        for k in range(order + 1):
            entries = []
            for multi in combinations_with_replacement(range(self.n), k):
                names = [self.coords[i] for i in multi]
                rows = []
                for c in flat:
                    rows.append(len(roots))
                    roots.append(self.diff.partial(c, names))
                entries.append((multi, rows))
            layout.append(entries)
        return Program(roots, self.names), layout

    def metric_values(self, points) -> np.ndarray:
        """Raw (unchecked) metric components at points, shape (P, n, n)."""
        key = ("metric0",)
        prog = self._programs.get(key)
        if prog is None:
            prog = Program([c for row in self.g for c in row], self.names)
            self._programs[key] = prog
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        vals = prog(self._inputs(pts))
        return vals.T.reshape(pts.shape[0], self.n, self.n)

    def sample(self, count: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> np.ndarray:
        """Uniform points in the domain box from a seeded generator."""
        rng = np.random.default_rng(seed)
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return lo + (hi - lo) * rng.random((count, self.n))

    def point(self, p) -> np.ndarray:
        """Normalise a binding (mapping or sequence) into a coordinate vector."""
        if isinstance(p, Mapping):
            try:
                return np.array([float(p[c]) for c in self.coords])
            except KeyError as exc:
                raise GeometryError(f"point is missing coordinate {exc.args[0]!r}") from None
        arr = np.asarray(p, dtype=float)
        if arr.shape != (self.n,):
            raise GeometryError(f"point needs {self.n} coordinates")
        return arr


def check_metric(g: np.ndarray, tol: float = 1e-10) -> None:
    """Symmetry and positive definiteness (leading principal minors)."""
    asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    if asym > tol * scale:
        raise MalformedChartError(f"metric is not symmetric (max asymmetry {asym:.3g})")
    n = g.shape[-1]
    for k in range(1, n + 1):
        minors = np.linalg.det(g[..., :k, :k])
        if np.any(minors <= 1e-12):
            if k == n:
                raise DegenerateMetricError(f"metric determinant {np.min(minors):.3g} <= 1e-12")
            raise DegenerateMetricError(f"metric not positive definite (leading minor {k} = {np.min(minors):.3g})")


def metric_at(chart: Chart, p) -> tuple[np.ndarray, np.ndarray, float]:
    """Metric, its inverse and determinant at one point."""
    x = chart.point(p)
    g = chart.metric_values(x[None])[0]
    check_metric(g)
    ginv = np.linalg.solve(g, np.eye(chart.n))
    return g, ginv, float(np.linalg.det(g))


# -- metric jets ------------------------------------------------------------


def symbolic_metric_jet(chart: Chart, points, order: int) -> Jet:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    jet = chart.field_jet(np.array(chart.g, dtype=object), pts, order)
    check_metric(jet.parts[0])
    # the upper triangle is authoritative; symmetrise derivatives exactly
    return Jet([0.5 * (p + np.swapaxes(p, 1, 2)) for p in jet.parts])


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.array([-2, -1, 0, 1, 2])


def fd_metric_jet(chart: Chart, points, order: int = 2, h: float = FD_STEP) -> Jet:
    """Metric jet from 4th-order central differences of metric values.

    Independent of the symbolic differentiator; only orders <= 2 are offered.
    """
    if order > 2:
        raise ValueError("finite-difference metric jets are limited to order 2")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = chart.n
    P = pts.shape[0]
    g0 = chart.metric_values(pts)
    check_metric(g0)
    parts = [g0]
    if order == 0:
        return Jet(parts)
    eye = np.eye(n)
    # on-axis samples: (P, n, 5, n, n)
    axis_pts = pts[:, None, None, :] + h * _OFFSETS[None, None, :, None] * eye[None, :, None, :]
    axis_vals = chart.metric_values(axis_pts.reshape(-1, n)).reshape(P, n, 5, n, n)
    d1 = np.einsum("s,pasij->pija", _D1, axis_vals) / h
    parts.append(d1)
    if order == 1:
        return Jet(parts)
    d2 = np.zeros((P, n, n, n, n))
    d2[..., np.arange(n), np.arange(n)] = np.einsum("s,pasij->pija", _D2, axis_vals) / h**2
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    if pairs:
        grid = h * np.array([[u, v] for u in _OFFSETS for v in _OFFSETS], dtype=float)
        w = np.outer(_D1, _D1).ravel() / h**2
        off = []
        for a, b in pairs:
            shift = np.zeros((25, n))
            shift[:, a] = grid[:, 0]
            shift[:, b] = grid[:, 1]
            off.append(shift)
        off = np.stack(off)  # (pairs, 25, n)
        mixed_pts = pts[:, None, None, :] + off[None]
        vals = chart.metric_values(mixed_pts.reshape(-1, n)).reshape(P, len(pairs), 25, n, n)
        mixed = np.einsum("s,pqsij->pqij", w, vals)
        for q, (a, b) in enumerate(pairs):
            d2[:, :, :, a, b] = mixed[:, q]
            d2[:, :, :, b, a] = mixed[:, q]
    parts.append(d2)
    return Jet([0.5 * (p + np.swapaxes(p, 1, 2)) for p in parts])


# -- curvature --------------------------------------------------------------


class GeometryJets:
    """Connection and curvature jets derived from a metric jet.

    With a metric jet of order K: Christoffels have order K-1 and the
    curvature tensors order K-2.
    """

    def __init__(self, g: Jet):
        if g.order < 2:
            raise ValueError("curvature needs a metric jet of order >= 2")
        self.n = g.parts[0].shape[-1]
        self.g = g
        self.ginv = jets.inverse(g)
        dg = jets.deriv(g)  # (a, i, j) = d_a g_ij
        first = 0.5 * (jets.permute(dg, "ijl", "lij") + jets.permute(dg, "jil", "lij") - dg)
        self.gamma = jets.contract("kl,lij->kij", self.ginv, first)
        dgam = jets.deriv(self.gamma)  # (a, m, j, l) = d_a G^m_jl
        rup = (
            jets.permute(dgam, "imjl", "ijlm")
            - jets.permute(dgam, "jmil", "ijlm")
            + jets.contract("pjl,mip->ijlm", self.gamma, self.gamma)
            - jets.contract("pil,mjp->ijlm", self.gamma, self.gamma)
        )
        self.riemann = jets.contract("km,ijlm->ijkl", self.g, rup)
        self.ricci = jets.contract("ik,ijkl->jl", self.ginv, self.riemann)
        self.scalar = jets.contract("jl,jl->", self.ginv, self.ricci)

    @property
    def order(self) -> int:
        return self.riemann.order

    def covariant(self, t: Jet, variance: str) -> Jet:
        return jets.covariant(t, variance, self.gamma)

    def raise_slots(self, t: np.ndarray, slots: Sequence[int] | None = None) -> np.ndarray:
        """Raise the given base slots (default: all) of a value array (P, n, ..., n)."""
        out = t
        for s in range(t.ndim - 1) if slots is None else slots:
            out = _raise_slot(self.ginv.parts[0], out, s)
        return out

    def norm(self, t: np.ndarray) -> np.ndarray:
        """Pointwise g-norm of an all-lower tensor, shape (P,)."""
        up = t
        for s in range(t.ndim - 1):
            up = _raise_slot(self.ginv.parts[0], up, s)
        total = np.sum((t * up).reshape(t.shape[0], -1), axis=1)
        return np.sqrt(np.maximum(total, 0.0))


def _raise_slot(ginv: np.ndarray, t: np.ndarray, s: int) -> np.ndarray:
    moved = np.moveaxis(t, 1 + s, -1)
    raised = np.einsum("p...b,pab->p...a", moved, ginv)
    return np.moveaxis(raised, -1, 1 + s)


def geometry_jets(chart: Chart, points, order: int = 2, method: str = "symbolic",
                  h: float = FD_STEP) -> GeometryJets:
    """Curvature jets at points; ``order`` is the metric jet order (>= 2)."""
    if method == "symbolic":
        g = symbolic_metric_jet(chart, points, order)
    elif method == "fd":
        g = fd_metric_jet(chart, points, order, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GeometryJets(g)


@dataclass
class TensorValue:
    """Components of a tensor at one point; ``variance`` has 'l'/'u' per slot."""

    components: np.ndarray
    variance: str
    point: tuple = ()

    @property
    def rank(self) -> int:
        return len(self.variance)

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        if self.components.ndim != len(self.variance):
            raise ValueError("variance length must equal tensor rank")
        if self.components.ndim and len(set(self.components.shape)) > 1:
            raise ValueError("all tensor slots must share the dimension")


@dataclass
class CurvaturePack:
    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    christoffel: np.ndarray  # [k, i, j] = G^k_ij
    riemann: np.ndarray  # [i, j, k, l]
    ricci: np.ndarray
    scalar: float
    ricci_norm2: float
    nabla_ricci: np.ndarray | None = field(default=None)  # [i, j, k] = nabla_i R_jk


def curvature_pack(chart: Chart, p, method: str = "symbolic", with_nabla_ricci: bool = False) -> CurvaturePack:
    x = chart.point(p)
    order = 3 if with_nabla_ricci else 2
    gj = geometry_jets(chart, x[None], order=order, method=method)
    ric = gj.ricci.value[0]
    ricup = np.einsum("ia,jb,ab->ij", gj.ginv.value[0], gj.ginv.value[0], ric)
    nabla = None
    if with_nabla_ricci:
        nabla = gj.covariant(gj.ricci, "ll").value[0]
    return CurvaturePack(
        point=x,
        g=gj.g.value[0],
        ginv=gj.ginv.value[0],
        christoffel=gj.gamma.value[0],
        riemann=gj.riemann.value[0],
        ricci=ric,
        scalar=float(gj.scalar.value[0]),
        ricci_norm2=float(np.sum(ric * ricup)),
        nabla_ricci=nabla,
    )


def christoffel(chart: Chart, p) -> np.ndarray:
    x = chart.point(p)
    metric_at(chart, x)
    g = symbolic_metric_jet(chart, x[None], 1)
    ginv = jets.inverse(g)
    dg = jets.deriv(g)
    first = 0.5 * (jets.permute(dg, "ijl", "lij") + jets.permute(dg, "jil", "lij") - dg)
    return jets.contract("kl,lij->kij", ginv, first).value[0]


def riemann(chart: Chart, p) -> np.ndarray:
    return curvature_pack(chart, p).riemann


def ricci(chart: Chart, p) -> np.ndarray:
    return curvature_pack(chart, p).ricci


def scalar(chart: Chart, p) -> float:
    return curvature_pack(chart, p).scalar


def covariant_derivative(components, variance: str, chart: Chart, p) -> TensorValue:
    """nabla T at p for a tensor field whose components are expressions.

    The new lower slot is the first index of the result.
    """
    comps = np.asarray(components, dtype=object)
    if comps.ndim != len(variance):
        raise ValueError(f"variance {variance!r} does not match component rank {comps.ndim}")
    x = chart.point(p)
    gj = geometry_jets(chart, x[None], order=2)
    t = chart.field_jet(comps, x[None], 1)
    out = jets.covariant(t, variance, gj.gamma)
    return TensorValue(out.value[0], "l" + variance, tuple(x))


def _scalar_jets(chart: Chart, f, x, order: int):
    gj = geometry_jets(chart, x[None], order=max(order, 2))
    fj = chart.field_jet(np.array(_as_expr(f), dtype=object), x[None], order)
    return gj, fj


def gradient(f, chart: Chart, p) -> np.ndarray:
    """Contravariant gradient (g^ij d_j f)."""
    x = chart.point(p)
    gj, fj = _scalar_jets(chart, f, x, 1)
    return gj.ginv.value[0] @ jets.deriv(fj).value[0]


def hessian(f, chart: Chart, p) -> np.ndarray:
    x = chart.point(p)
    gj, fj = _scalar_jets(chart, f, x, 2)
    return gj.covariant(jets.deriv(fj), "l").value[0]


def laplacian(f, chart: Chart, p) -> float:
    x = chart.point(p)
    gj, fj = _scalar_jets(chart, f, x, 2)
    hess = gj.covariant(jets.deriv(fj), "l").value[0]
    return float(np.sum(gj.ginv.value[0] * hess))


def grad_norm2(f, chart: Chart, p) -> float:
    x = chart.point(p)
    gj, fj = _scalar_jets(chart, f, x, 1)
    df = jets.deriv(fj).value[0]
    return float(df @ gj.ginv.value[0] @ df)


def random_polynomial_chart(n: int, seed: int = 0, scale: float = 0.2, half_width: float = 0.5,
                            terms: int = 3, max_degree: int = 3) -> Chart:
    """Identity plus a few random monomials (coefficients in [-scale, scale]).

    Resamples until the metric is positive definite on a seeded probe set of
    the box, including its corners.
    """
    rng = np.random.default_rng(seed)
    coords = [f"x{i + 1}" for i in range(n)]
    domain = [(-half_width, half_width)] * n
    corners = np.array(np.meshgrid(*[[-half_width, half_width]] * n)).reshape(n, -1).T
    for _ in range(100):
        g = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                expr = 1.0 if i == j else 0.0
                expr = _as_expr(expr)
                for _t in range(terms):
                    deg = int(rng.integers(1, max_degree + 1))
                    mono = _as_expr(float(rng.uniform(-scale, scale)))
                    for v in rng.integers(0, n, size=deg):
                        mono = mono * _as_expr(coords[v])
                    expr = expr + mono
                g[i][j] = g[j][i] = simplify(expr)
        chart = Chart(coords, g, domain, name=f"random-poly-{n}-{seed}")
        probe = np.vstack([corners, chart.sample(200, seed)])
        try:
            check_metric(chart.metric_values(probe))
        except DegenerateMetricError:
            continue
        return chart
    raise GeometryError("could not draw a positive-definite random metric")
