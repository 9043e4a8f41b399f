"""Rigidity classes of shrinking/expanding Schouten solitons from sampled evidence.

A soliton with R^2 = (n-1)|Ric|^2 everywhere is Einstein with constant f, the
Gaussian soliton, or a quotient of R x N^(n-1). The verdict here only says
the sampled data is consistent with one of these; it certifies nothing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import CurvaturePack, DEFAULT_SEED
from .soliton import IDENTITY_TOL, SOLITON_TOL, SolitonData, SolitonSample, _defect

EINSTEIN = "Einstein"
GAUSSIAN = "Gaussian"
CYLINDER = "cylinder"
NOT_RIGID = "not-rigid-evidence"
NOT_SOLITON = "not-a-soliton"
LABELS = (EINSTEIN, GAUSSIAN, CYLINDER, NOT_RIGID, NOT_SOLITON)

RANK_TOL = 1e-6
CONSTANCY_TOL = 1e-6
CURVATURE_MATCH_TOL = 1e-5
FLAT_POTENTIAL_TOL = 1e-8
MIN_SAMPLES = 20


class ClassificationError(Exception):
    pass


@dataclass
class ClassificationVerdict:
    label: str
    reason: str
    R_spread: float
    R_mean: float
    rank_histogram: dict = field(default_factory=dict)
    defect_max: float = 0.0
    grad_max: float = 0.0
    residual_max: float = 0.0
    samples: int = 0
    regular: int = 0

    def __str__(self):
        ranks = ", ".join(f"{k}:{v}" for k, v in sorted(self.rank_histogram.items()))
        return (
            f"verdict: {self.label} ({self.reason})\n"
            f"  soliton residual max   {self.residual_max:.3e}\n"
            f"  |R^2-(n-1)|Ric|^2| max {self.defect_max:.3e}\n"
            f"  R mean / spread        {self.R_mean:.10g} / {self.R_spread:.3e}\n"
            f"  max |grad f|           {self.grad_max:.3e}\n"
            f"  Ricci rank histogram   {{{ranks}}}\n"
            f"  samples (regular)      {self.samples} ({self.regular})"
        )


def _ricci_eigenvalues(g: np.ndarray, ric: np.ndarray) -> np.ndarray:
    """Eigenvalues of g^-1 Ric via a Cholesky frame, batched over the leading axis."""
    L = np.linalg.cholesky(g)
    Linv = np.linalg.inv(L)
    A = Linv @ ric @ np.swapaxes(Linv, -1, -2)
    return np.linalg.eigvalsh(0.5 * (A + np.swapaxes(A, -1, -2)))


def _ranks(g, ric, R, tol) -> np.ndarray:
    ev = _ricci_eigenvalues(g, ric)
    return np.sum(np.abs(ev) > tol * (1 + np.abs(R))[..., None], axis=-1)


def rank_of_ricci(pack: CurvaturePack, tol: float = RANK_TOL) -> int:
    """Number of eigenvalues of Ric (relative to g) above tol (1 + |R|)."""
    return int(_ranks(pack.g[None], pack.ricci[None], np.array([pack.scalar]), tol)[0])


def einstein_scalar(n: int, lam: float) -> float:
    """Scalar curvature forced on an Einstein soliton with constant f."""
    return 2 * (n - 1) * n * lam / (n - 2)


def _is_einstein(s: SolitonSample, n: int, v: ClassificationVerdict) -> bool:
    ric_dev = s.gj.norm(s.ric - (s.R / n)[:, None, None] * s.g)
    return bool(np.max(ric_dev) <= IDENTITY_TOL * (1 + abs(v.R_mean))
                and v.R_spread <= CONSTANCY_TOL * (1 + abs(v.R_mean)))


def classify(sd: SolitonData, samples: int = 50, seed: int = DEFAULT_SEED, points=None) -> ClassificationVerdict:
    n, lam = sd.n, sd.lam
    pts = sd.chart.sample(samples, seed) if points is None else np.atleast_2d(points)
    s = SolitonSample(sd, pts)
    grad = np.sqrt(np.maximum(s.grad_norm2, 0.0))
    flat_f = bool(np.all(grad <= FLAT_POTENTIAL_TOL))
    nreg = int(np.sum(s.regular))
    if flat_f:
        if len(pts) < MIN_SAMPLES:
            raise ClassificationError(f"need at least {MIN_SAMPLES} samples, got {len(pts)}")
    elif nreg < MIN_SAMPLES:
        raise ClassificationError(f"need at least {MIN_SAMPLES} regular samples, got {nreg}")

    ranks = _ranks(s.g, s.ric, s.R, RANK_TOL)
    hist = {int(r): int(c) for r, c in zip(*np.unique(ranks, return_counts=True))}
    defect = np.abs(_defect(s))
    mask = s.regular if not flat_f else np.ones(len(pts), bool)
    v = ClassificationVerdict(
        label=NOT_RIGID, reason="", R_spread=float(np.ptp(s.R)), R_mean=float(np.mean(s.R)),
        rank_histogram=hist, defect_max=float(np.max(defect[mask])), grad_max=float(np.max(grad)),
        residual_max=float(np.max(s.residual_norm)), samples=len(pts), regular=nreg,
    )

    if v.residual_max > SOLITON_TOL:
        if flat_f and lam != 0 and _is_einstein(s, n, v):
            # an Einstein chart paired with the wrong lambda: do not guess the intended one
            v.reason = (f"Einstein, but R = {v.R_mean:.6g} does not match lambda "
                        f"(expected R = {einstein_scalar(n, lam):.6g})")
        else:
            v.label, v.reason = NOT_SOLITON, "soliton equation fails at a sample point"
        return v
    if lam == 0:
        v.reason = "the steady case is not classified"
        return v
    if not flat_f and v.defect_max > IDENTITY_TOL:
        v.reason = "Ricci has more than two eigenvalues somewhere (defect gate)"
        return v
    if v.R_spread > CONSTANCY_TOL * (1 + abs(v.R_mean)):
        v.reason = "scalar curvature is not constant (constancy gate)"
        return v

    rn = v.R_mean / lam
    if flat_f:
        if not _is_einstein(s, n, v):
            v.reason = "f is constant but Ric is not a multiple of g"
        elif abs(rn - einstein_scalar(n, 1.0)) > CURVATURE_MATCH_TOL:
            v.reason = "Einstein, but R does not match lambda"
        else:
            v.label, v.reason = EINSTEIN, "f constant and Ric = (R/n) g"
        return v
    if abs(rn) <= CURVATURE_MATCH_TOL and set(hist) == {0}:
        v.label, v.reason = GAUSSIAN, "R = 0 and Ric = 0"
    elif abs(rn - 2 * (n - 1)) <= CURVATURE_MATCH_TOL and set(hist) == {n - 1}:
        v.label, v.reason = CYLINDER, "R = 2(n-1) lambda and Ric has rank n-1"
    else:
        v.reason = f"R/lambda = {rn:.6g} with Ricci ranks {sorted(hist)} fits no rigid class"
    return v
