"""Command-line front end.

    schouten verify --fixture gaussian:n=3,lambda=1
    schouten curvature metric.txt --at 0.1,0.2,0.3
    schouten ode --lambda 1 --b0 1 --bp0 3 --span 10
    schouten all --fixture rigid:n=5,k=2,lambda=1 --out run1

Exit status: 0 when every asserted check passes, 1 when one fails,
2 on bad input.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import conformal, ode
from .classify import NOT_SOLITON, ClassificationError, classify
from .expr import ExprError
from .geometry import DEFAULT_SAMPLES, DEFAULT_SEED, GeometryError, curvature_pack
from .soliton import ResidualReport, SolitonData, SolitonError, SolitonSample, verify
from .specfile import SpecFileError, resolve

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VERBS = ("verify", "curvature", "classify", "ode", "trace", "all")
TRACE_LINEARITY_TOL = 1e-5
TRACE_SLOPE_TOL = 1e-4
TRACE_INEQUALITY_TOL = 1e-6
DRIFT_TOL = 1e-6
REWRITE_TOL = 1e-5


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    verb: str
    source: str | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    step: float = ode.DEFAULT_STEP
    out: str = "schouten-out"
    at: list | None = None
    start: list | None = None
    lam: float | None = None
    b0: float = 1.0
    bp0: float = 3.0
    span: float = 10.0
    trace_span: float = 1.0

    def __post_init__(self):
        if self.verb not in VERBS:
            raise InputError(f"unknown verb {self.verb!r}")
        if self.samples < 1:
            raise InputError("--samples must be at least 1")
        if self.step <= 0:
            raise InputError("--step must be positive")


@dataclass
class Section:
    title: str
    lines: list = field(default_factory=list)
    ok: bool = True


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.3e}"


def render_report(report: ResidualReport) -> list[str]:
    rows = []
    head = f"{'check':<26} {'residual':>10} {'tol':>10} {'pts':>5} {'skip':>5}  verdict"
    rows.append(head)
    rows.append("-" * len(head))
    for e in report:
        verdict = {True: "PASS", False: "FAIL", None: "INFO" if not e.asserted else "SKIP"}[e.passed]
        res = e.residual if e.checked else None
        rows.append(f"{e.label:<26} {_fmt(res):>10} {_fmt(e.tolerance):>10} {e.checked:>5} {e.skipped:>5}  {verdict}")
        rows.append(f"    {e.description}")
        if e.skipped:
            rows.append(f"    skipped: {e.skip_reason}")
        if e.note:
            rows.append(f"    note: {e.note}")
        if e.passed is False and e.worst_point is not None:
            rows.append(f"    worst at {np.array2string(e.worst_point, precision=6)}")
    return rows


def _check(lines: list, label: str, value: float, tol: float, ok_if_below: bool = True) -> bool:
    ok = value <= tol if ok_if_below else value >= -tol
    lines.append(f"{label:<38} {value: .3e}  tol {tol:.1e}  {'PASS' if ok else 'FAIL'}")
    return ok


def _matrix(a: np.ndarray) -> str:
    a = np.where(np.abs(a) < 1e-14, 0.0, a)
    return np.array2string(a, precision=10, suppress_small=True, max_line_width=120)


def _point(text, n: int, flag: str) -> np.ndarray:
    vals = [v for v in str(text).replace(",", " ").split() if v]
    try:
        x = np.array([float(v) for v in vals])
    except ValueError:
        raise InputError(f"{flag} expects {n} numbers, got {text!r}") from None
    if x.shape != (n,):
        raise InputError(f"{flag} expects {n} numbers, got {len(vals)}")
    return x


# -- sections ---------------------------------------------------------------------


def run_verify(sd: SolitonData, cfg: RunConfig) -> Section:
    rep = verify(sd, cfg.samples, cfg.seed)
    sec = Section("soliton identities", render_report(rep), rep.passed)
    return sec


def run_classify(sd: SolitonData, cfg: RunConfig) -> Section:
    v = classify(sd, cfg.samples, cfg.seed)
    return Section("classification", str(v).splitlines(), v.label != NOT_SOLITON)


def run_curvature(sd: SolitonData, cfg: RunConfig) -> Section:
    chart = sd.chart
    if cfg.at is None:
        raise InputError("curvature needs --at")
    x = _point(cfg.at, chart.n, "--at")
    pack = curvature_pack(chart, x)
    lines = [f"point {np.array2string(x, precision=10)}",
             f"scalar curvature R = {pack.scalar:.12g}",
             f"|Ric|^2 = {pack.ricci_norm2:.12g}",
             "metric g_ij:", _matrix(pack.g),
             "Ricci R_ij:", _matrix(pack.ricci),
             "Christoffel Gamma^k_ij (nonzero):"]
    n = chart.n
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                c = pack.christoffel[k, i, j]
                if abs(c) > 1e-14:
                    lines.append(f"  Gamma^{k + 1}_{i + 1}{j + 1} = {c:.12g}")
    lines.append("Riemann R_ijkl (nonzero, i<j, k<l):")
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                for l in range(k + 1, n):
                    r = pack.riemann[i, j, k, l]
                    if abs(r) > 1e-14:
                        lines.append(f"  R_{i + 1}{j + 1}{k + 1}{l + 1} = {r:.12g}")
    if n >= 3:
        cp = conformal.conformal_batch(chart, x[None])[0]
        lines.append(f"max |Weyl| = {np.max(np.abs(cp.weyl)):.3e}")
        lines.append(f"max |Cotton| = {np.max(np.abs(cp.cotton)):.3e}")
        lines.append("Bach B_ij:")
        lines.append(_matrix(cp.bach))
        if cp.bach_audit is not None:
            lines.append(f"Bach from Weyl vs from Cotton, relative gap {cp.bach_audit:.3e}")
    return Section("curvature", lines, True)


def run_ode(lam: float, cfg: RunConfig) -> Section:
    traj = ode.integrate_equality_ode(lam, cfg.b0, cfg.bp0, (0.0, cfg.span), cfg.step)
    fi = ode.first_integral(traj)
    lines = [f"lambda = {lam:g}, b(0) = {cfg.b0:g}, b'(0) = {cfg.bp0:g}, h = {cfg.step:g}, "
             f"s in [0, {traj.s[-1]:g}]"]
    if traj.truncated:
        lines.append(f"truncated: {traj.truncated}")
    if fi.truncated:
        lines.append(f"first integral checked up to s = {fi.checked_until:g}: {fi.truncated}")
    lines.append(f"sigma0 = {fi.sigma0:.12g}")
    ok = _check(lines, "first integral drift", fi.drift, DRIFT_TOL)
    ru, rv = ode.rewriting_checks(traj)
    tol = max(REWRITE_TOL, ode.rewriting_tolerance(traj))
    ok &= _check(lines, "(b(b'-2lam))' = 2 (b'-2lam)^2", ru, tol)
    ok &= _check(lines, "(b(b'-4lam))' = 2 (b'-lam)(b'-4lam)", rv, tol)
    path = os.path.join(cfg.out, "ode.csv")
    ode.write_trajectory_csv(traj, path, fi.sigma0)
    lines.append(f"wrote {path}")
    return Section("structural ODE", lines, ok)


def _default_start(sd: SolitonData, cfg: RunConfig) -> np.ndarray:
    pts = sd.chart.sample(cfg.samples, cfg.seed)
    s = SolitonSample(sd, pts)
    idx = np.nonzero(s.regular)[0]
    if idx.size == 0:
        raise InputError("no regular sample point to start a trace from (is f constant?)")
    return pts[idx[0]]


def run_trace(sd: SolitonData, cfg: RunConfig) -> Section:
    x0 = _default_start(sd, cfg) if cfg.start is None else _point(cfg.start, sd.n, "--start")
    tr = ode.trace_integral_curve(sd, x0, (0.0, cfg.trace_span), cfg.step)
    lines = [f"start {np.array2string(x0, precision=10)}, h = {cfg.step:g}, "
             f"{len(tr.s)} points up to s = {tr.s[-1]:g}"]
    if tr.truncated:
        lines.append(f"truncated: {tr.truncated}")
    if len(tr.s) < 5:
        lines.append("too few points for the checks")
        return Section("integral curve", lines, False)
    chk = ode.inequality_check(tr, sd.lam, sd.n)
    scale = max(1.0, float(np.max(np.abs(tr.b))))
    ok = _check(lines, "(f o alpha)' = 1", chk.linearity, TRACE_LINEARITY_TOL)
    ok &= _check(lines, "b' = R/(n-1) + 2 lambda", chk.slope_vs_curvature, TRACE_SLOPE_TOL)
    ok &= _check(lines, "b b'' - b'^2 + 6lam b' - 8lam^2 >= 0", chk.main_inequality_min,
                 TRACE_INEQUALITY_TOL * scale**2, ok_if_below=False)
    ok &= _check(lines, "(b'-2lam)(b'-4lam) <= 0", chk.product_max, TRACE_INEQUALITY_TOL * scale)
    spec = sd.meta.get("rigid")
    if spec is not None and spec.k <= spec.n - 1:
        from .rigid import expected_slope

        slope, _ = expected_slope(spec)
        err = float(np.max(np.abs(tr.slope() - slope)))
        ok &= _check(lines, f"b' = 4(n-1)lam/(2(n-1)-k) = {slope:.6g}", err, TRACE_SLOPE_TOL)
    path = os.path.join(cfg.out, "trace.csv")
    ode.write_trace_csv(tr, path)
    lines.append(f"wrote {path}")
    return Section("integral curve", lines, ok)


def run(cfg: RunConfig) -> int:
    """Run the selected suites, write report.txt, return the exit status."""
    try:
        os.makedirs(cfg.out, exist_ok=True)
        sd = resolve(cfg.source) if cfg.source else None
        if sd is None and cfg.verb != "ode":
            raise InputError(f"{cfg.verb} needs an input file or --fixture")
        sections = []
        if cfg.verb in ("verify", "all"):
            sections.append(run_verify(sd, cfg))
        if cfg.verb == "curvature" or (cfg.verb == "all" and cfg.at is not None):
            sections.append(run_curvature(sd, cfg))
        if cfg.verb in ("classify", "all"):
            sections.append(run_classify(sd, cfg))
        if cfg.verb == "trace" or (cfg.verb == "all" and _has_regular(sd, cfg)):
            sections.append(run_trace(sd, cfg))
        elif cfg.verb == "all":
            sections.append(Section("integral curve", ["skipped: no regular sample point (f is constant)"]))
        if cfg.verb in ("ode", "all"):
            lam = cfg.lam if cfg.lam is not None else (sd.lam if sd is not None else 1.0)
            sections.append(run_ode(lam, cfg))
    except (InputError, SpecFileError, GeometryError, ExprError, SolitonError,
            ClassificationError, ode.OdeError, conformal.ConformalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    title = sd.chart.name if sd is not None else "ODE only"
    lines = [f"schouten {cfg.verb}: {title}",
             f"samples = {cfg.samples}, seed = {cfg.seed:#x}, step = {cfg.step:g}", ""]
    for sec in sections:
        lines += [f"== {sec.title} ==", *sec.lines, ""]
    ok = all(sec.ok for sec in sections)
    lines.append("RESULT: " + ("PASS" if ok else "FAIL"))
    text = "\n".join(lines) + "\n"
    with open(os.path.join(cfg.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _has_regular(sd: SolitonData | None, cfg: RunConfig) -> bool:
    if sd is None:
        return False
    try:
        _default_start(sd, cfg)
    except InputError:
        return False
    return True


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schouten", description="Curvature and Schouten soliton checks.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("input", nargs="?", help="metric-spec file")
    p.add_argument("--fixture", help="builtin fixture, e.g. cylinder:n=3,k=2,lambda=0.5")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    p.add_argument("--step", type=float, default=ode.DEFAULT_STEP)
    p.add_argument("--out", default="schouten-out")
    p.add_argument("--at", help="point for the curvature verb, comma separated")
    p.add_argument("--start", help="start point of the integral curve")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--b0", type=float, default=1.0)
    p.add_argument("--bp0", type=float, default=3.0, help="b'(0) for the ODE")
    p.add_argument("--span", type=float, default=10.0, help="s-length of the ODE run")
    p.add_argument("--trace-span", type=float, default=1.0, help="s-length of the integral curve")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.input and args.fixture:
        print("error: give an input file or --fixture, not both", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = RunConfig(args.verb, args.input or args.fixture, args.samples, args.seed, args.step,
                        args.out, args.at, args.start, args.lam, args.b0, args.bp0, args.span,
                        args.trace_span)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
