"""Weyl, Cotton and Bach tensors, and the divergence of Bach in dimension 3.

Index conventions follow ``geometry``. The Bach tensor is computed twice in
dimension >= 4, once from the second divergence of Weyl and once from the
divergence of Cotton; disagreement means a sign convention is broken and is
raised as ``ConventionFault`` rather than returned.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .geometry import Chart, GeometryJets, geometry_jets
from .jets import Jet

BACH_AGREEMENT_RTOL = 1e-6
MAGNITUDE_FLOOR = 1e-6


class ConformalError(Exception):
    pass


class ConventionFault(ConformalError):
    pass


def relative_difference(a: np.ndarray, b: np.ndarray, floor: float = MAGNITUDE_FLOOR) -> float:
    scale = max(float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)), floor)
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def _require_dim(n: int, what: str):
    if n < 3:
        raise ConformalError(f"{what} needs dimension >= 3, got {n}")


def weyl_jet(gj: GeometryJets, order: int | None = None) -> Jet:
    n = gj.n
    _require_dim(n, "Weyl tensor")
    m = gj.order if order is None else order
    g, ric, rs, riem = (j.truncate(m) for j in (gj.g, gj.ricci, gj.scalar, gj.riemann))
    kn = (
        jets.contract("ik,jl->ijkl", g, ric)
        - jets.contract("il,jk->ijkl", g, ric)
        - jets.contract("jk,il->ijkl", g, ric)
        + jets.contract("jl,ik->ijkl", g, ric)
    )
    gg = jets.contract("ik,jl->ijkl", g, g) - jets.contract("il,jk->ijkl", g, g)
    return riem - (1.0 / (n - 2)) * kn + (1.0 / ((n - 1) * (n - 2))) * jets.contract(",ijkl->ijkl", rs, gg)


def cotton_jet(gj: GeometryJets) -> Jet:
    """C_ijk = nabla_i R_jk - nabla_j R_ik - (g_jk nabla_i R - g_ik nabla_j R) / (2(n-1))."""
    n = gj.n
    _require_dim(n, "Cotton tensor")
    nric = gj.covariant(gj.ricci, "ll")  # (i, j, k) = nabla_i R_jk
    dr = jets.deriv(gj.scalar)
    c = nric - jets.permute(nric, "jik", "ijk")
    corr = jets.contract("jk,i->ijk", gj.g, dr) - jets.contract("ik,j->ijk", gj.g, dr)
    return c - (1.0 / (2 * (n - 1))) * corr


def _ricci_up(gj: GeometryJets) -> Jet:
    t = jets.contract("ka,ab->kb", gj.ginv, gj.ricci)
    return jets.contract("kb,bl->kl", t, gj.ginv)


def bach_from_cotton(gj: GeometryJets, cotton: Jet | None = None, weyl: Jet | None = None) -> Jet:
    """(n-2) B_ij = nabla^k C_kij + R_kl W_i^k_j^l; for n = 3 just nabla^k C_kij."""
    n = gj.n
    cotton = cotton_jet(gj) if cotton is None else cotton
    nc = gj.covariant(cotton, "lll")  # (a, k, i, j) = nabla_a C_kij
    div_c = jets.contract("ak,akij->ij", gj.ginv, nc)
    if n == 3:
        return div_c
    weyl = weyl_jet(gj) if weyl is None else weyl
    rw = jets.contract("kl,ikjl->ij", _ricci_up(gj), weyl)
    return (1.0 / (n - 2)) * (div_c + rw)


def bach_from_weyl(gj: GeometryJets, weyl: Jet | None = None) -> Jet:
    """B_ij = nabla^k nabla^l W_ikjl / (n-3) + R_kl W_i^k_j^l / (n-2), n >= 4."""
    n = gj.n
    if n < 4:
        raise ConformalError("the Weyl form of the Bach tensor needs n >= 4")
    weyl = weyl_jet(gj) if weyl is None else weyl
    nw = gj.covariant(weyl, "llll")  # (b, i, k, j, l)
    nnw = gj.covariant(nw, "lllll")  # (a, b, i, k, j, l) = nabla_a nabla_b W_ikjl
    t = jets.contract("ak,abikjl->bijl", gj.ginv, nnw)
    ddw = jets.contract("bl,bijl->ij", gj.ginv, t)
    rw = jets.contract("kl,ikjl->ij", _ricci_up(gj), weyl)
    return (1.0 / (n - 3)) * ddw + (1.0 / (n - 2)) * rw


def div_bach_from_cotton(gj: GeometryJets, cotton: Jet | None = None) -> np.ndarray:
    """-R^il C_jil, the dimension-3 formula for the divergence of Bach."""
    if gj.n != 3:
        raise ConformalError("divergence of Bach is only provided for n = 3")
    cotton = cotton_jet(gj) if cotton is None else cotton
    ricup = _ricci_up(gj).value
    return -np.einsum("pil,pjil->pj", ricup, cotton.value)


def div_bach_direct(gj: GeometryJets, bach: Jet | None = None) -> np.ndarray:
    """g^ai nabla_a B_ij; needs a Bach jet of order >= 1 (metric jet order 5)."""
    bach = bach_from_cotton(gj) if bach is None else bach
    nb = gj.covariant(bach, "ll")
    return np.einsum("pai,paij->pj", gj.ginv.value, nb.value)


def bach_gap(gj: GeometryJets, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise |a - b|_g relative to the larger of |a|, |b| and |Rm|^2.

    Bach carries two powers of curvature, so |Rm|^2 is the natural scale when
    both candidates are (close to) zero.
    """
    scale = np.maximum.reduce([gj.norm(a), gj.norm(b), gj.norm(gj.riemann.value) ** 2,
                               np.full(len(a), MAGNITUDE_FLOOR)])
    return gj.norm(a - b) / scale


@dataclass
class ConformalPack:
    point: np.ndarray
    weyl: np.ndarray
    cotton: np.ndarray
    bach: np.ndarray
    div_bach: np.ndarray | None = None
    bach_audit: float | None = None  # bach_gap between the two Bach formulas


def conformal_batch(chart: Chart, points, with_div: bool = False, audit: bool = True) -> list[ConformalPack]:
    """Conformal tensors at many points sharing one symbolic program."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = chart.n
    _require_dim(n, "conformal tensors")
    div = with_div and n == 3
    gj = geometry_jets(chart, pts, order=5 if div else 4)
    weyl = weyl_jet(gj)
    cotton = cotton_jet(gj)
    bach = bach_from_cotton(gj, cotton, weyl)
    gaps = [None] * len(pts)
    if n >= 4 and audit:
        other = bach_from_weyl(gj, weyl).value
        gaps = list(bach_gap(gj, other, bach.value))
        worst = max(gaps)
        if worst > BACH_AGREEMENT_RTOL:
            raise ConventionFault(
                f"Bach from Weyl and Bach from Cotton disagree (relative gap {worst:.3g}); "
                "curvature sign conventions are inconsistent"
            )
    divs = div_bach_from_cotton(gj, cotton) if div else None
    return [
        ConformalPack(
            point=pts[i],
            weyl=weyl.value[i],
            cotton=cotton.value[i],
            bach=bach.value[i],
            div_bach=None if divs is None else divs[i],
            bach_audit=None if gaps[i] is None else float(gaps[i]),
        )
        for i in range(len(pts))
    ]


def weyl(chart: Chart, p) -> np.ndarray:
    x = chart.point(p)
    return weyl_jet(geometry_jets(chart, x[None], order=2)).value[0]


def cotton(chart: Chart, p) -> np.ndarray:
    x = chart.point(p)
    return cotton_jet(geometry_jets(chart, x[None], order=3)).value[0]


def bach(chart: Chart, p) -> np.ndarray:
    return conformal_batch(chart, chart.point(p)[None])[0].bach


def div_bach(chart: Chart, p, cross_check: bool = True, rtol: float = 1e-6) -> np.ndarray:
    """-R^il C_jil at p, optionally checked against the direct divergence of Bach."""
    if chart.n != 3:
        raise ConformalError("divergence of Bach is only provided for n = 3")
    x = chart.point(p)
    gj = geometry_jets(chart, x[None], order=5 if cross_check else 3)
    cot = cotton_jet(gj)
    formula = div_bach_from_cotton(gj, cot)[0]
    if cross_check:
        direct = div_bach_direct(gj, bach_from_cotton(gj, cot))[0]
        gap = relative_difference(direct, formula)
        if gap > rtol:
            raise ConventionFault(f"div B formula and direct divergence differ (relative gap {gap:.3g})")
    return formula
