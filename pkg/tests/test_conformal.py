import numpy as np
import pytest

from schouten import conformal
from schouten.conformal import (
    BACH_AGREEMENT_RTOL,
    ConformalError,
    ConventionFault,
    bach,
    bach_from_cotton,
    bach_from_weyl,
    conformal_batch,
    cotton,
    cotton_jet,
    div_bach,
    div_bach_direct,
    div_bach_from_cotton,
    relative_difference,
    weyl,
    weyl_jet,
)
from schouten.geometry import geometry_jets, random_polynomial_chart
from schouten.rigid import cylinder, einstein, gaussian

from conftest import flat_chart, sphere2, sphere4


def _trace(ginv, t, a, b):
    """g^{ab} contraction of slots a and b of a batched tensor."""
    letters = "ijklm"[: t.ndim - 1]
    keep = "".join(c for k, c in enumerate(letters) if k not in (a, b))
    spec = f"p{letters[a]}{letters[b]},p{letters}->p{keep}"
    return np.einsum(spec, ginv, t)


# -- Weyl ---------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_weyl_vanishes_in_dimension_three(seed):
    chart = random_polynomial_chart(3, seed=seed)
    gj = geometry_jets(chart, chart.sample(20, seed), order=2)
    W = weyl_jet(gj, order=0).value
    scale = max(1.0, float(np.max(np.abs(gj.riemann.value))))
    assert np.max(np.abs(W)) <= 1e-8 * scale


def test_weyl_flat_and_round_sphere():
    np.testing.assert_array_equal(weyl(flat_chart(4), [0.1, 0.2, 0.3, 0.4]), 0.0)
    chart = sphere4()
    for x in chart.sample(3, 2):
        assert np.max(np.abs(weyl(chart, x))) <= 1e-12


@pytest.mark.parametrize("n, seed", [(4, 0), (5, 1)])
def test_weyl_symmetries_and_trace_free(n, seed):
    chart = random_polynomial_chart(n, seed=seed)
    gj = geometry_jets(chart, chart.sample(10, seed), order=2)
    W = weyl_jet(gj).value
    assert np.max(np.abs(W)) > 1e-3  # nontrivial
    np.testing.assert_allclose(W, -np.einsum("pijkl->pjikl", W), atol=1e-12)
    np.testing.assert_allclose(W, -np.einsum("pijkl->pijlk", W), atol=1e-12)
    np.testing.assert_allclose(W, np.einsum("pijkl->pklij", W), atol=1e-12)
    assert np.max(np.abs(_trace(gj.ginv.value, W, 0, 2))) <= 1e-8


def test_weyl_needs_dimension_three():
    with pytest.raises(ConformalError):
        weyl(sphere2(), [1.0, 0.0])


# -- Cotton -------------------------------------------------------------------


@pytest.mark.parametrize("n, seed", [(3, 0), (3, 4), (4, 2)])
def test_cotton_antisymmetric_and_trace_free(n, seed):
    chart = random_polynomial_chart(n, seed=seed)
    gj = geometry_jets(chart, chart.sample(10, seed), order=3)
    C = cotton_jet(gj).value
    assert np.max(np.abs(C)) > 1e-3
    assert np.max(np.abs(C + np.einsum("pijk->pjik", C))) <= 1e-8
    assert np.max(np.abs(_trace(gj.ginv.value, C, 1, 2))) <= 1e-8
    # cyclic sum vanishes as well
    cyc = C + np.einsum("pijk->pjki", C) + np.einsum("pijk->pkij", C)
    assert np.max(np.abs(cyc)) <= 1e-8


def test_cotton_vanishes_on_flat_and_cylinder():
    np.testing.assert_array_equal(cotton(flat_chart(3), [0.0, 0.1, 0.2]), 0.0)
    sd = cylinder(3, 0.5)
    for x in sd.chart.sample(5, 1):
        assert np.max(np.abs(cotton(sd.chart, x))) <= 1e-12


# -- Bach ---------------------------------------------------------------------


@pytest.mark.parametrize("n, seed", [(4, 0), (4, 1), (4, 2), (5, 3)])
def test_bach_two_formulas_agree(n, seed):
    chart = random_polynomial_chart(n, seed=seed)
    gj = geometry_jets(chart, chart.sample(4, seed), order=4)
    W = weyl_jet(gj)
    a = bach_from_weyl(gj, W).value
    b = bach_from_cotton(gj, weyl=W).value
    assert np.max(np.abs(b)) > 1e-3
    for x, y in zip(a, b):
        assert relative_difference(x, y) <= BACH_AGREEMENT_RTOL


@pytest.mark.parametrize("n, seed", [(3, 0), (4, 1), (5, 2)])
def test_bach_symmetric_and_trace_free(n, seed):
    chart = random_polynomial_chart(n, seed=seed)
    for pack in conformal_batch(chart, chart.sample(3, seed)):
        B = pack.bach
        assert np.max(np.abs(B - B.T)) <= 1e-7
        ginv = np.linalg.inv(chart.metric_values(pack.point[None])[0])
        assert abs(np.sum(ginv * B)) <= 1e-7


def test_bach_flat_and_einstein():
    np.testing.assert_array_equal(bach(flat_chart(4), [0.1, 0.2, 0.3, 0.4]), 0.0)
    for sd in (einstein(4, 1.0), einstein(4, -1.0)):
        for pack in conformal_batch(sd.chart, sd.chart.sample(3, 5)):
            assert np.max(np.abs(pack.bach)) <= 1e-10


def test_bach_along_gradient_on_cylinder_four():
    sd = cylinder(4, 1.0)
    packs = conformal_batch(sd.chart, sd.chart.sample(5, 9))
    for p in packs:
        grad = np.array([2 * p.point[0], 0, 0, 0])  # f = x1^2 on a unit flat factor
        assert np.max(np.abs(p.bach @ grad)) <= 1e-10


def test_inconsistent_conventions_are_a_hard_error(monkeypatch):
    real = conformal.bach_from_weyl
    monkeypatch.setattr(conformal, "bach_from_weyl", lambda gj, w=None: -1.0 * real(gj, w))
    chart = random_polynomial_chart(4, seed=0)
    with pytest.raises(ConventionFault):
        conformal_batch(chart, chart.sample(2))


def test_batch_reports_audit_gap():
    chart = random_polynomial_chart(4, seed=2)
    for p in conformal_batch(chart, chart.sample(3)):
        assert p.bach_audit is not None and p.bach_audit <= BACH_AGREEMENT_RTOL
    assert conformal_batch(random_polynomial_chart(3, seed=2), [[0, 0, 0]])[0].bach_audit is None


# -- divergence of Bach, n = 3 ---------------------------------------------------


def test_div_bach_flat_and_cylinder():
    np.testing.assert_array_equal(div_bach(flat_chart(3), [0.1, 0.2, 0.3]), 0.0)
    sd = cylinder(3, 2.0)
    for x in sd.chart.sample(3, 3):
        assert np.max(np.abs(div_bach(sd.chart, x))) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_div_bach_formula_matches_direct_divergence(seed):
    chart = random_polynomial_chart(3, seed=seed)
    gj = geometry_jets(chart, chart.sample(3, seed), order=5)
    C = cotton_jet(gj)
    formula = div_bach_from_cotton(gj, C)
    direct = div_bach_direct(gj, bach_from_cotton(gj, C))
    assert np.max(np.abs(formula)) > 1e-4
    for a, b in zip(formula, direct):
        assert relative_difference(a, b) <= 1e-6


def test_div_bach_pointwise_cross_check_passes():
    chart = random_polynomial_chart(3, seed=5)
    div_bach(chart, chart.sample(1)[0], cross_check=True)


def test_div_bach_only_in_dimension_three():
    with pytest.raises(ConformalError):
        div_bach(flat_chart(4), [0, 0, 0, 0])


def test_div_bach_sign_from_the_cotton_riemann_relation(rng):
    """Pure algebra in n = 3: with Ric(v, .) = 0, W = 0 and C_ijk = R_jikl v^l,
    -R^il C_jil equals +(R^2 - 2|Ric|^2)/2 v_j in these conventions."""
    g = np.eye(3)
    for _ in range(5):
        a, b = rng.normal(size=2)
        ric = np.diag([0.0, a, b])
        R = a + b
        v = np.array([rng.normal(), 0.0, 0.0])
        e = np.einsum
        riem = (e("ik,jl->ijkl", g, ric) - e("il,jk->ijkl", g, ric) - e("jk,il->ijkl", g, ric)
                + e("jl,ik->ijkl", g, ric) - R / 2 * (e("ik,jl->ijkl", g, g) - e("il,jk->ijkl", g, g)))
        C = e("jikl,l->ijk", riem, v)
        lhs = -e("il,jil->j", ric, C)
        np.testing.assert_allclose(lhs, 0.5 * (R**2 - 2 * (a * a + b * b)) * v, atol=1e-12)


def test_gaussian_conformal_tensors_vanish():
    sd = gaussian(4, 1.0)
    for p in conformal_batch(sd.chart, sd.chart.sample(2)):
        assert not np.any(p.weyl) and not np.any(p.cotton) and not np.any(p.bach)
