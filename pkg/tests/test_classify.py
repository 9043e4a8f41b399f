import numpy as np
import pytest

from schouten import classify as cl
from schouten.classify import (
    CYLINDER,
    EINSTEIN,
    GAUSSIAN,
    NOT_RIGID,
    NOT_SOLITON,
    ClassificationError,
    classify,
    einstein_scalar,
    rank_of_ricci,
)
from schouten.geometry import curvature_pack, random_polynomial_chart
from schouten.rigid import RigidSpec, build_rigid, cylinder, einstein, gaussian, perturbed_gaussian
from schouten.soliton import SolitonData

from conftest import flat_chart


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("lam", [1.0, -1.0])
def test_gaussian_family(n, lam):
    v = classify(gaussian(n, lam))
    assert v.label == GAUSSIAN
    assert v.rank_histogram == {0: 50}


@pytest.mark.parametrize("n, lam", [(3, 0.5), (4, 1.0), (4, -1.0), (5, 2.0)])
def test_cylinder_family(n, lam):
    v = classify(cylinder(n, lam))
    assert v.label == CYLINDER
    assert v.R_mean == pytest.approx(2 * (n - 1) * lam, rel=1e-10)
    assert set(v.rank_histogram) == {n - 1}


@pytest.mark.parametrize("n, lam", [(3, 1.0), (4, 1.0), (4, -1.0), (5, -0.5)])
def test_einstein_family(n, lam):
    v = classify(einstein(n, lam))
    assert v.label == EINSTEIN
    assert v.R_mean == pytest.approx(einstein_scalar(n, lam), rel=1e-10)
    assert v.regular == 0


def test_einstein_scalar_values():
    assert einstein_scalar(3, 1.0) == 12.0
    assert einstein_scalar(4, -1.0) == -12.0


@pytest.mark.parametrize("sd", [gaussian(3, 1.0, flat_scale=2.0), cylinder(3, 0.5, flat_scale=2.0),
                                cylinder(4, -1.0, flat_scale=0.5)], ids=str)
def test_dilation_does_not_change_the_label(sd):
    base = {"gaussian": GAUSSIAN, "cylinder": CYLINDER}[sd.kind]
    assert classify(sd).label == base


def test_perturbed_gaussian_is_not_a_soliton():
    v = classify(perturbed_gaussian(3, 1.0))
    assert v.label == NOT_SOLITON
    assert v.residual_max == pytest.approx(0.01 * np.sqrt(3), rel=1e-10)


def test_product_is_not_rigid_evidence():
    v = classify(build_rigid(RigidSpec(5, 2, 1.0)))
    assert v.label == NOT_RIGID and "defect" in v.reason
    assert v.defect_max == pytest.approx(64 / 9, rel=1e-10)


def test_steady_case_is_not_classified():
    v = classify(SolitonData(flat_chart(3), "0", 0.0))
    assert v.label == NOT_RIGID and "steady" in v.reason


def test_gates_after_the_residual(monkeypatch):
    # with the residual gate disabled, a generic chart falls through to a later gate
    monkeypatch.setattr(cl, "SOLITON_TOL", np.inf)
    chart = random_polynomial_chart(3, seed=1)
    v = classify(SolitonData(chart, "1", 1.0))
    assert v.label == NOT_RIGID
    assert "constancy" in v.reason or "multiple of g" in v.reason
    v = classify(SolitonData(einstein(3, 1.0).chart, "2", 2.0))
    assert v.label == NOT_RIGID and "does not match lambda" in v.reason


def test_einstein_chart_with_inconsistent_lambda():
    # S^3 has R = 12 (unit radius); with lambda = 2 the equation would need R = 24
    v = classify(SolitonData(einstein(3, 1.0).chart, "0", 2.0))
    assert v.label == NOT_RIGID
    assert "does not match lambda" in v.reason and "expected R = 24" in v.reason
    assert v.residual_max > 1.0


def test_non_einstein_chart_with_constant_potential_is_not_a_soliton():
    v = classify(SolitonData(cylinder(3, 0.5).chart, "1", 0.5))
    assert v.label == NOT_SOLITON


def test_too_few_samples():
    with pytest.raises(ClassificationError):
        classify(gaussian(3, 1.0), samples=10)
    with pytest.raises(ClassificationError):
        classify(einstein(3, 1.0), samples=5)


def test_explicit_points_and_seed_are_reproducible():
    sd = cylinder(3, 0.5)
    a = classify(sd, seed=7)
    b = classify(sd, points=sd.chart.sample(50, 7))
    assert str(a) == str(b)


def test_verdict_text_shows_evidence():
    text = str(classify(cylinder(3, 0.5)))
    assert text.startswith("verdict: cylinder")
    for key in ("soliton residual max", "Ricci rank histogram", "R mean / spread", "samples (regular)"):
        assert key in text


def test_rank_of_ricci():
    assert rank_of_ricci(curvature_pack(flat_chart(3), [0.1, 0.2, 0.3])) == 0
    sd = cylinder(3, 0.5)
    assert rank_of_ricci(curvature_pack(sd.chart, sd.chart.sample(1)[0])) == 2
    sd = einstein(3, 1.0)
    assert rank_of_ricci(curvature_pack(sd.chart, sd.chart.sample(1)[0])) == 3
