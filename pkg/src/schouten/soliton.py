"""Pointwise checks for gradient Schouten solitons

    Ric + Hess f = (R / (2(n-1)) + lambda) g

and the identities and estimates that follow from it. Every check returns
residuals per sample point; ``ResidualReport`` aggregates them by label.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import conformal, jets
from .expr import Expr, Program
from .geometry import DEFAULT_SAMPLES, DEFAULT_SEED, Chart, GeometryJets, _as_expr, geometry_jets

SOLITON_TOL = 1e-8
IDENTITY_TOL = 1e-8
INEQUALITY_TOL = 1e-8
COTTON_TOL = 1e-8
BACH_EIGEN_TOL = 1e-7
EPS_REG = 1e-6


class SolitonError(Exception):
    pass


@dataclass
class SolitonData:
    chart: Chart
    f: Expr
    lam: float
    f0: float | None = None
    kind: str = ""  # builder tag, e.g. "gaussian", "cylinder", "einstein"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.f = _as_expr(self.f)
        self.lam = float(self.lam)
        if not np.isfinite(self.lam):
            raise SolitonError("lambda must be finite")
        stray = self.f.free_vars - set(self.chart.names)
        if stray:
            raise SolitonError(f"potential uses undeclared names {sorted(stray)}")

    @property
    def n(self) -> int:
        return self.chart.n


# -- reports ------------------------------------------------------------------


@dataclass
class ResidualEntry:
    label: str
    description: str
    residual: float = 0.0
    worst_point: np.ndarray | None = None
    tolerance: float = 0.0
    checked: int = 0
    skipped: int = 0
    skip_reason: str = ""
    asserted: bool = True
    note: str = ""

    @property
    def passed(self) -> bool | None:
        if not self.asserted:
            return None
        if self.checked == 0:
            return None
        return self.residual <= self.tolerance

    def merge(self, other: "ResidualEntry") -> "ResidualEntry":
        if other.label != self.label:
            raise ValueError("cannot merge entries with different labels")
        best = self if self.residual >= other.residual else other
        return ResidualEntry(
            self.label, self.description, best.residual, best.worst_point,
            max(self.tolerance, other.tolerance), self.checked + other.checked,
            self.skipped + other.skipped, self.skip_reason or other.skip_reason,
            self.asserted and other.asserted, self.note or other.note,
        )


@dataclass
class ResidualReport:
    entries: dict = field(default_factory=dict)

    def add(self, entry: ResidualEntry) -> None:
        old = self.entries.get(entry.label)
        self.entries[entry.label] = entry if old is None else old.merge(entry)

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        out = ResidualReport(dict(self.entries))
        for e in other.entries.values():
            out.add(e)
        return out

    def __getitem__(self, label) -> ResidualEntry:
        return self.entries[label]

    def __iter__(self):
        return iter(self.entries.values())

    @property
    def passed(self) -> bool:
        return all(e.passed is not False for e in self)


def _entry(label, description, values, points, tol, mask=None, reason="", asserted=True, note=""):
    values = np.asarray(values, dtype=float)
    mask = np.ones(len(values), bool) if mask is None else np.asarray(mask, bool)
    entry = ResidualEntry(label, description, tolerance=tol, asserted=asserted, note=note)
    entry.checked = int(mask.sum())
    entry.skipped = int((~mask).sum())
    if entry.skipped:
        entry.skip_reason = reason
    if entry.checked:
        v = np.where(mask, values, -np.inf)
        k = int(np.argmax(v))
        entry.residual = float(v[k])
        entry.worst_point = np.asarray(points[k])
    return entry


# -- batched evaluation -------------------------------------------------------


class SolitonSample:
    """Everything the checks need at a batch of points, computed once."""

    def __init__(self, sd: SolitonData, points, order: int = 2, with_conformal: bool = False):
        self.sd = sd
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        chart = sd.chart
        n = chart.n
        metric_order = 4 if with_conformal else max(order, 2)
        gj: GeometryJets = geometry_jets(chart, self.points, order=metric_order)
        self.gj = gj
        fj = chart.field_jet(np.array(sd.f, dtype=object), self.points, 2)
        self.f = fj.value
        df = jets.deriv(fj)
        self.df = df.value  # covector d_i f
        self.grad = np.einsum("pij,pj->pi", gj.ginv.value, self.df)
        self.grad_norm2 = np.einsum("pi,pi->p", self.df, self.grad)
        self.hess = gj.covariant(df, "l").value
        self.laplacian = np.einsum("pij,pij->p", gj.ginv.value, self.hess)
        self.g = gj.g.value
        self.ric = gj.ricci.value
        self.R = gj.scalar.value
        self.dR = jets.deriv(gj.scalar).value if gj.scalar.order >= 1 else None
        ricup = gj.raise_slots(self.ric)
        self.ric_norm2 = np.einsum("pij,pij->p", self.ric, ricup)
        lam = sd.lam
        self.residual_tensor = self.ric + self.hess - (self.R / (2 * (n - 1)) + lam)[:, None, None] * self.g
        self.residual_norm = gj.norm(self.residual_tensor)
        self.regular = np.sqrt(np.maximum(self.grad_norm2, 0.0)) > EPS_REG
        self.cotton = self.bach = None
        if with_conformal:
            self.weyl = conformal.weyl_jet(gj, order=0)
            cot = conformal.cotton_jet(gj)
            self.cotton = cot.value
            self.bach = conformal.bach_from_cotton(gj, cot, self.weyl if n > 3 else None).value
            self.div_bach = conformal.div_bach_from_cotton(gj, cot) if n == 3 else None

    @property
    def is_soliton(self) -> np.ndarray:
        return self.residual_norm <= SOLITON_TOL


def soliton_residual(sd: SolitonData, p) -> np.ndarray:
    """Ric + Hess f - (R/(2(n-1)) + lambda) g at one point."""
    return SolitonSample(sd, sd.chart.point(p)[None]).residual_tensor[0]


def two_eigenvalue_defect(sd: SolitonData, p) -> float:
    """R^2 - (n-1)|Ric|^2; zero iff Ric has at most the eigenvalues {0, R/(n-1)}."""
    s = SolitonSample(sd, sd.chart.point(p)[None])
    return float(_defect(s)[0])


def _defect(s: SolitonSample) -> np.ndarray:
    return s.R**2 - (s.sd.n - 1) * s.ric_norm2


def soliton_entries(s: SolitonSample) -> list[ResidualEntry]:
    return [_entry("soliton_equation", "Ric + Hess f - (R/(2(n-1)) + lambda) g = 0",
                   s.residual_norm, s.points, SOLITON_TOL)]


def identity_entries(s: SolitonSample) -> list[ResidualEntry]:
    n, lam = s.sd.n, s.sd.lam
    gate = s.is_soliton
    reason = "not a soliton here"
    trace = np.abs(s.laplacian - n * lam + (n - 2) / (2 * (n - 1)) * s.R)
    ric_grad = np.einsum("pij,pj->pi", s.ric, s.grad)
    kill = s.gj.norm(ric_grad)
    identity = np.abs(np.einsum("pi,pi->p", s.grad, s.dR) + (s.R / (n - 1) + 2 * lam) * s.R - 2 * s.ric_norm2)
    return [
        _entry("laplacian_trace", "Lap f = n lambda - (n-2)/(2(n-1)) R", trace, s.points, IDENTITY_TOL, gate, reason),
        _entry("ricci_kills_gradient", "Ric(grad f, .) = 0", kill, s.points, IDENTITY_TOL, gate, reason),
        _entry("gradient_scalar_identity", "<grad f, grad R> + (R/(n-1) + 2 lambda) R = 2|Ric|^2",
               identity, s.points, IDENTITY_TOL, gate, reason),
    ]


def identity_suite(sd: SolitonData, p) -> list[ResidualEntry]:
    return identity_entries(SolitonSample(sd, sd.chart.point(p)[None], order=3))


# -- extremum of f and the estimates --------------------------------------------


def extremum_of_potential(sd: SolitonData, starts: int = 9) -> float:
    """Min of f over the domain box (max when lambda < 0), multi-start L-BFGS-B.

    Starts are drawn from the 3^n lattice {lo, mid, hi}^n, always including
    the centre, spread evenly through the lattice when it has more points.
    """
    chart = sd.chart
    sign = 1.0 if sd.lam > 0 else -1.0
    names = chart.names
    fprog = Program([sd.f], names)
    gprog = Program([chart.diff.diff(sd.f, c) for c in chart.coords], names)

    def fun(x):
        return sign * float(fprog(chart._inputs(x[None]))[0, 0])

    def jac(x):
        return sign * gprog(chart._inputs(x[None]))[:, 0]

    axes = [(lo, 0.5 * (lo + hi), hi) for lo, hi in chart.domain]
    lattice = list(itertools.product(*axes))
    centre = tuple(a[1] for a in axes)
    picks = [centre] + [lattice[i] for i in np.linspace(0, len(lattice) - 1, starts - 1).round().astype(int)]
    best = np.inf
    for x0 in dict.fromkeys(picks):
        res = minimize(fun, np.array(x0), jac=jac, method="L-BFGS-B", bounds=chart.domain,
                       options={"ftol": 1e-15, "gtol": 1e-12})
        best = min(best, res.fun)
    if not np.isfinite(best):
        raise SolitonError("could not locate an extremum of f on the domain box")
    return sign * best


def inequality_entries(s: SolitonSample, f0: float | None = None) -> list[ResidualEntry]:
    sd = s.sd
    n, lam = sd.n, sd.lam
    if lam == 0:
        raise SolitonError("the curvature and gradient estimates need lambda != 0")
    if f0 is None:
        f0 = sd.f0 if sd.f0 is not None else extremum_of_potential(sd)
    gate = s.is_soliton
    reason = "not a soliton here"
    if not np.any(s.regular):
        # the estimates are stated for nonconstant potentials only
        gate = np.zeros_like(gate)
        reason = "potential is constant on the sample; estimates need nonconstant f"
    lr = lam * s.R
    df = s.f - f0
    # residual = shortfall below zero of each slack
    rows = [
        ("scalar_curvature_lower", "0 <= lambda R", lr),
        ("scalar_curvature_upper", "lambda R <= 2(n-1) lambda^2", 2 * (n - 1) * lam**2 - lr),
        ("gradient_lower", "2 lambda (f - f0) <= |grad f|^2", s.grad_norm2 - 2 * lam * df),
        ("gradient_upper", "|grad f|^2 <= 4 lambda (f - f0)", 4 * lam * df - s.grad_norm2),
    ]
    return [
        _entry(label, desc, np.maximum(-slack, 0.0), s.points, INEQUALITY_TOL, gate, reason,
               note=f"min slack {float(np.min(slack)):.3g}; f0 = {f0:.6g}")
        for label, desc, slack in rows
    ]


def inequality_suite(sd: SolitonData, p, f0: float | None = None) -> list[ResidualEntry]:
    return inequality_entries(SolitonSample(sd, sd.chart.point(p)[None]), f0)


# -- Bach along the gradient ------------------------------------------------------


def bach_eigen_entries(s: SolitonSample) -> list[ResidualEntry]:
    """Cotton = Riemann(grad f) and B(grad f, .) = mu g(grad f, .)."""
    if s.cotton is None:
        raise SolitonError("sample was built without conformal tensors")
    n = s.sd.n
    gate = s.regular & s.is_soliton
    reason = "critical point of f (regular points are dense) or not a soliton here"
    rel = np.einsum("pjikl,pl->pijk", s.gj.riemann.value, s.grad)
    cot_res = s.gj.norm(s.cotton - rel)
    mu = (s.R**2 - (n - 1) * s.ric_norm2) / ((n - 1) * (n - 2) ** 2)
    bgrad = np.einsum("pkj,pk->pj", s.bach, s.grad)
    eig_res = s.gj.norm(bgrad - mu[:, None] * s.df)
    return [
        _entry("cotton_riemann", "C_ijk = R_jikl grad^l f", cot_res, s.points, COTTON_TOL, gate, reason),
        _entry("bach_gradient_eigen", "B(grad f, .) = (R^2 - (n-1)|Ric|^2)/((n-1)(n-2)^2) g(grad f, .)",
               eig_res, s.points, BACH_EIGEN_TOL, gate, reason),
    ]


def div_bach_entries(s: SolitonSample) -> list[ResidualEntry]:
    """(div B)(grad f) next to both candidate right-hand sides; informational.

    The two candidates differ only by sign; on rigid fixtures both vanish.
    """
    if s.sd.n != 3 or s.div_bach is None:
        return []
    gate = s.regular & s.is_soliton
    lhs = np.einsum("pj,pj->p", s.div_bach, s.grad)
    cand = 0.5 * (s.R**2 - 2 * s.ric_norm2) * s.grad_norm2
    plus = np.abs(lhs - cand)
    minus = np.abs(lhs + cand)
    note = (f"max |divB(grad f)| = {float(np.max(np.abs(lhs), initial=0)):.3g}; "
            f"gap to +(R^2-2|Ric|^2)/2 |grad f|^2: {float(np.max(plus, initial=0)):.3g}; "
            f"gap to -(R^2-2|Ric|^2)/2 |grad f|^2: {float(np.max(minus, initial=0)):.3g}")
    return [_entry("div_bach_gradient", "(div B)(grad f) vs +/-(R^2 - 2|Ric|^2)/2 |grad f|^2",
                   np.minimum(plus, minus), s.points, BACH_EIGEN_TOL, gate,
                   "critical point of f or not a soliton here", asserted=False, note=note)]


def bach_eigen_check(sd: SolitonData, p) -> list[ResidualEntry]:
    return bach_eigen_entries(SolitonSample(sd, sd.chart.point(p)[None], with_conformal=True))


def defect_entries(s: SolitonSample) -> list[ResidualEntry]:
    """R^2 - (n-1)|Ric|^2 must not be positive at regular points of a soliton."""
    d = _defect(s)
    gate = s.regular & s.is_soliton
    return [_entry("two_eigenvalue_sign", "R^2 - (n-1)|Ric|^2 <= 0 at regular points",
                   np.maximum(d, 0.0), s.points, IDENTITY_TOL, gate,
                   "critical point of f or not a soliton here",
                   note=f"defect range [{float(np.min(d)):.3g}, {float(np.max(d)):.3g}]")]


def verify(sd: SolitonData, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
           points=None, conformal_checks: bool = True) -> ResidualReport:
    """Run every pointwise check over seeded sample points."""
    pts = sd.chart.sample(samples, seed) if points is None else points
    with_conf = conformal_checks and sd.n >= 3
    s = SolitonSample(sd, pts, order=3, with_conformal=with_conf)
    report = ResidualReport()
    entries = soliton_entries(s) + identity_entries(s)
    if sd.lam != 0:
        entries += inequality_entries(s)
    entries += defect_entries(s)
    if with_conf:
        entries += bach_eigen_entries(s) + div_bach_entries(s)
    for e in entries:
        report.add(e)
    return report
