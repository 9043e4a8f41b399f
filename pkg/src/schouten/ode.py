"""The scalar ODE for b(s) = |grad f|^2 along normalised gradient curves.

Along an integral curve alpha of grad f / |grad f|^2 one has (f o alpha)' = 1,
b' = R/(n-1) + 2 lambda, and b b'' - b'^2 + 6 lambda b' - 8 lambda^2 >= 0 with
equality exactly where Ric has at most two eigenvalues. The equality case is
integrated here with classical RK4; its conserved quantity is

    sigma0 = (b' - 4 lambda)^2 / (b (b' - 2 lambda)).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .expr import Program
from .geometry import GeometryError, check_metric, geometry_jets
from .soliton import EPS_REG, SolitonData

B_FLOOR = 1e-8
CROSSING_EPS = 1e-6
DEFAULT_STEP = 1e-3
STEP_DRIFT_TOL = 1e-3  # relative miss of the per-step increment of f


class OdeError(Exception):
    pass


class FirstIntegralError(OdeError):
    def __init__(self, message: str, s: float):
        super().__init__(f"{message} at s = {s:.17g}")
        self.s = s


class RegularPointError(OdeError):
    pass


def rk4_step(rhs, s: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(s, y)
    k2 = rhs(s + h / 2, y + h / 2 * k1)
    k3 = rhs(s + h / 2, y + h / 2 * k2)
    k4 = rhs(s + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def equality_rhs(lam: float):
    """First-order system (b, b') for b b'' = b'^2 - 6 lambda b' + 8 lambda^2."""

    def rhs(s, y):
        b, bp = y
        return np.array([bp, (bp * bp - 6 * lam * bp + 8 * lam * lam) / b])

    return rhs


@dataclass
class OdeTrajectory:
    lam: float
    s: np.ndarray
    b: np.ndarray
    bp: np.ndarray
    h: float
    truncated: str = ""  # reason the run stopped early, if it did

    @property
    def sigma0_series(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.bp - 4 * self.lam) ** 2 / (self.b * (self.bp - 2 * self.lam))

    def invariant_residual(self, sigma0: float) -> np.ndarray:
        rhs = sigma0 * self.b * (self.bp - 2 * self.lam)
        return np.abs((self.bp - 4 * self.lam) ** 2 - rhs) / np.maximum(1.0, np.abs(rhs))


def integrate_equality_ode(lam: float, b0: float, bp0: float, s_range=(0.0, 1.0),
                           h: float = DEFAULT_STEP) -> OdeTrajectory:
    """Fixed-step RK4 for the equality ODE; stops if b drops below 1e-8."""
    if b0 <= 0:
        raise OdeError("b0 must be positive (b is a squared norm)")
    if h <= 0:
        raise OdeError("step must be positive")
    s0, s1 = map(float, s_range)
    steps = int(round((s1 - s0) / h))
    if steps < 1:
        raise OdeError("empty s-range")
    rhs = equality_rhs(lam)
    ss = [s0]
    ys = [np.array([b0, bp0], dtype=float)]
    reason = ""
    for i in range(steps):
        y = rk4_step(rhs, ss[-1], ys[-1], h)
        if not np.all(np.isfinite(y)) or y[0] < B_FLOOR:
            reason = f"b fell below {B_FLOOR:g} after s = {ss[-1]:.6g}"
            break
        ss.append(s0 + (i + 1) * h)
        ys.append(y)
    y = np.array(ys)
    return OdeTrajectory(lam, np.array(ss), y[:, 0], y[:, 1], h, reason)


@dataclass
class FirstIntegral:
    sigma0: float
    drift: float
    checked_until: float
    truncated: str = ""


def first_integral(traj: OdeTrajectory) -> FirstIntegral:
    """sigma0 from the initial condition and its maximal relative drift.

    A start on b' = 2 lambda is an error; a later approach to it ends the
    drift evaluation there.
    """
    lam = traj.lam
    gap = np.abs(traj.bp - 2 * lam)
    if gap[0] < CROSSING_EPS:
        raise FirstIntegralError("b' = 2 lambda, the first integral is undefined", float(traj.s[0]))
    bad = np.nonzero(gap < CROSSING_EPS)[0]
    stop = len(traj.s) if bad.size == 0 else int(bad[0])
    note = "" if bad.size == 0 else f"b' reached 2 lambda at s = {traj.s[stop]:.6g}"
    sigma0 = float((traj.bp[0] - 4 * lam) ** 2 / (traj.b[0] * (traj.bp[0] - 2 * lam)))
    part = OdeTrajectory(lam, traj.s[:stop], traj.b[:stop], traj.bp[:stop], traj.h)
    drift = float(np.max(part.invariant_residual(sigma0)))
    return FirstIntegral(sigma0, drift, float(traj.s[stop - 1]), note)


def rewriting_checks(traj: OdeTrajectory, lam: float | None = None) -> tuple[float, float]:
    """Max residuals of u' = 2u^2/b^2 and v' = 2(b'-lam)v/b, u = b(b'-2lam), v = b(b'-4lam).

    Derivatives are centred differences; end points are excluded.
    """
    lam = traj.lam if lam is None else lam
    b, bp, h = traj.b, traj.bp, traj.h
    if len(b) < 3:
        raise OdeError("need at least 3 grid points")
    u = b * (bp - 2 * lam)
    v = b * (bp - 4 * lam)
    du = (u[2:] - u[:-2]) / (2 * h)
    dv = (v[2:] - v[:-2]) / (2 * h)
    bi, bpi = b[1:-1], bp[1:-1]
    ru = np.abs(du - 2 * u[1:-1] ** 2 / bi**2)
    rv = np.abs(dv - 2 * (bpi - lam) * v[1:-1] / bi)
    return float(np.max(ru)), float(np.max(rv))


def rewriting_tolerance(traj: OdeTrajectory) -> float:
    """10 h^2 times the size of the right-hand sides."""
    lam = traj.lam
    u = traj.b * (traj.bp - 2 * lam)
    scale = max(1.0, float(np.max(np.abs(2 * u**2 / traj.b**2))))
    return 10 * traj.h**2 * scale


# -- integral curves on a chart ------------------------------------------------


@dataclass
class CurveTrace:
    s: np.ndarray
    points: np.ndarray
    f: np.ndarray
    b: np.ndarray
    R: np.ndarray = field(default_factory=lambda: np.zeros(0))
    truncated: str = ""

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0]) if len(self.s) > 1 else 0.0

    def linearity_error(self) -> float:
        """max |f(s_i) - f(s_0) - (s_i - s_0)| / max(1, |s_i - s_0|)."""
        ds = self.s - self.s[0]
        return float(np.max(np.abs(self.f - self.f[0] - ds) / np.maximum(1.0, np.abs(ds))))

    def slope(self) -> np.ndarray:
        """Centred-difference b' at interior points."""
        return (self.b[2:] - self.b[:-2]) / (2 * self.h)


def _field(sd: SolitonData):
    chart = sd.chart
    names = chart.names
    fprog = Program([sd.f], names)
    dprog = Program([chart.diff.diff(sd.f, c) for c in chart.coords], names)

    def evaluate(x):
        inp = chart._inputs(x[None])
        g = chart.metric_values(x[None])[0]
        df = dprog(inp)[:, 0]
        grad = np.linalg.solve(g, df)
        return float(fprog(inp)[0, 0]), grad, float(df @ grad)

    return evaluate


def trace_integral_curve(sd: SolitonData, start, s_range=(0.0, 1.0), h: float = DEFAULT_STEP,
                         with_curvature: bool = True) -> CurveTrace:
    """Integrate d alpha/ds = grad f / |grad f|^2 with RK4 from ``start``.

    Stops (without error) on leaving the domain box or nearing the critical set.
    """
    chart = sd.chart
    x0 = chart.point(start)
    evaluate = _field(sd)
    lo = np.array([d[0] for d in chart.domain])
    hi = np.array([d[1] for d in chart.domain])
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise GeometryError("start point lies outside the chart domain")
    check_metric(chart.metric_values(x0[None]))
    f0, _, b0 = evaluate(x0)
    if np.sqrt(b0) <= EPS_REG:
        raise RegularPointError("start is a critical point of f (|grad f| <= 1e-6)")

    def rhs(s, x):
        _, grad, b = evaluate(x)
        if np.sqrt(b) <= EPS_REG:
            raise RegularPointError("reached the critical set")
        return grad / b

    s0, s1 = map(float, s_range)
    steps = int(round((s1 - s0) / h))
    xs, fs, bs, ss = [x0], [f0], [b0], [s0]
    reason = ""
    for i in range(steps):
        try:
            x = rk4_step(rhs, ss[-1], xs[-1], h)
        except RegularPointError:
            reason = f"approached the critical set after s = {ss[-1]:.6g}"
            break
        if np.any(x < lo) or np.any(x > hi):
            reason = f"left the chart domain after s = {ss[-1]:.6g}"
            break
        fv, _, bv = evaluate(x)
        # f grows by exactly h along the exact curve; a large miss means the step
        # jumped over or into the critical set
        if np.sqrt(bv) <= EPS_REG or abs(fv - fs[-1] - h) > STEP_DRIFT_TOL * h:
            reason = f"approached the critical set after s = {ss[-1]:.6g}"
            break
        xs.append(x)
        fs.append(fv)
        bs.append(bv)
        ss.append(s0 + (i + 1) * h)
    pts = np.array(xs)
    R = geometry_jets(chart, pts, order=2).scalar.value if with_curvature else np.zeros(0)
    return CurveTrace(np.array(ss), pts, np.array(fs), np.array(bs), R, reason)


@dataclass
class TraceCheck:
    linearity: float
    main_inequality_min: float  # min of b b'' - b'^2 + 6 lam b' - 8 lam^2
    slope_vs_curvature: float  # max |b' - (R/(n-1) + 2 lam)|
    product_max: float  # max of (b' - 2 lam)(b' - 4 lam)
    slope_mean: float


def inequality_check(trace: CurveTrace, lam: float, n: int) -> TraceCheck:
    """Evaluate the differential inequality and slope relations on a trace."""
    if len(trace.s) < 5:
        raise OdeError("need at least 5 trace points")
    h = trace.h
    b = trace.b
    bp = (b[2:] - b[:-2]) / (2 * h)
    bpp = (b[2:] - 2 * b[1:-1] + b[:-2]) / h**2
    bi = b[1:-1]
    main = bi * bpp - bp**2 + 6 * lam * bp - 8 * lam**2
    product = (bp - 2 * lam) * (bp - 4 * lam)
    slope_err = np.inf
    if trace.R.size:
        slope_err = float(np.max(np.abs(bp - (trace.R[1:-1] / (n - 1) + 2 * lam))))
    return TraceCheck(trace.linearity_error(), float(np.min(main)), slope_err,
                      float(np.max(product)), float(np.mean(bp)))


# -- CSV ------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: OdeTrajectory, path, sigma0: float | None = None) -> None:
    if sigma0 is None:
        sigma0 = first_integral(traj).sigma0
    resid = traj.invariant_residual(sigma0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "b", "bprime", "sigma0_resid"])
        for row in zip(traj.s, traj.b, traj.bp, resid):
            w.writerow([_fmt(v) for v in row])


def write_trace_csv(trace: CurveTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "f", "b"])
        for row in zip(trace.s, trace.f, trace.b):
            w.writerow([_fmt(v) for v in row])


def read_csv(path) -> dict:
    """Columns of a trajectory or trace CSV as float arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}
