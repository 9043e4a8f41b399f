import math

import numpy as np
import pytest

from schouten.expr import evaluate
from schouten.geometry import geometry_jets
from schouten.rigid import (
    RigidSpec,
    RigidSpecError,
    build_rigid,
    cylinder,
    einstein,
    expected_slope,
    gaussian,
    perturbed_gaussian,
)
from schouten.soliton import verify

SPECS = [
    RigidSpec(3, 0, 1.0),
    RigidSpec(4, 0, -1.0),
    RigidSpec(3, 2, 0.5),
    RigidSpec(4, 3, 1.0),
    RigidSpec(4, 3, -1.0),
    RigidSpec(5, 2, 1.0),
    RigidSpec(5, 3, -0.5),
    RigidSpec(3, 3, 1.0),
    RigidSpec(4, 4, -2.0),
]


def test_gaussian_builder():
    sd = gaussian(3, 1.0)
    assert sd.kind == "gaussian" and sd.chart.coords == ("x1", "x2", "x3")
    assert evaluate(sd.f, {"x1": 1.0, "x2": 2.0, "x3": 0.0}) == pytest.approx(2.5)


def test_r_times_s2_arithmetic():
    spec = RigidSpec(3, 2, 0.5)
    assert spec.einstein_curvature == pytest.approx(2.0)
    sd = build_rigid(spec)
    assert sd.kind == "cylinder"
    assert evaluate(sd.f, {"x1": 2.0, "t1": 1.0, "phi": 0.0}) == pytest.approx(2.0)  # f = x^2/2
    g = sd.chart.metric_values(np.array([[0.0, math.pi / 2, 0.0]]))[0]
    np.testing.assert_allclose(g, np.eye(3), atol=1e-15)  # S^2 of radius 1


def test_r_times_s3_arithmetic():
    spec = RigidSpec(4, 3, 1.0)
    assert spec.einstein_curvature == pytest.approx(6.0)
    sd = build_rigid(spec)
    assert evaluate(sd.f, {"x1": 1.5, "t1": 1.0, "t2": 1.0, "phi": 0.0}) == pytest.approx(1.5**2)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_every_fixture_passes_the_suite(spec):
    sd = build_rigid(spec)
    rep = verify(sd)
    assert rep.passed, [e.label for e in rep if e.passed is False]
    assert rep["soliton_equation"].residual <= 1e-9


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_scalar_curvature_is_constant(spec):
    sd = build_rigid(spec)
    R = geometry_jets(sd.chart, sd.chart.sample(50), order=2).scalar.value
    np.testing.assert_allclose(R, spec.einstein_curvature, atol=1e-8)


def test_factor_sign_checks():
    with pytest.raises(RigidSpecError):
        build_rigid(RigidSpec(4, 3, -1.0, factor="sphere"))
    with pytest.raises(RigidSpecError):
        build_rigid(RigidSpec(4, 3, 1.0, factor="hyperbolic"))
    with pytest.raises(RigidSpecError):
        build_rigid(RigidSpec(4, 1, 1.0))
    with pytest.raises(RigidSpecError):
        build_rigid(RigidSpec(4, 2, 1.0, factor="torus"))


@pytest.mark.parametrize("bad", [dict(n=2, k=0, lam=1.0), dict(n=3, k=4, lam=1.0), dict(n=3, k=0, lam=0.0),
                                 dict(n=3, k=0, lam=1.0, flat_scale=0.0)])
def test_spec_validation(bad):
    with pytest.raises(RigidSpecError):
        RigidSpec(**bad)


def test_auto_factor():
    assert RigidSpec(4, 2, 1.0).resolved_factor == "sphere"
    assert RigidSpec(4, 2, -1.0).resolved_factor == "hyperbolic"
    assert RigidSpec(4, 0, -1.0).resolved_factor == "none"


def test_sphere_chart_avoids_poles():
    sd = einstein(3, 1.0)
    for lo, hi in sd.chart.domain[:-1]:
        assert lo == pytest.approx(0.2) and hi == pytest.approx(math.pi - 0.2)


@pytest.mark.parametrize("n, k, lam, slope, product", [
    (3, 0, 1.0, 2.0, 0.0),
    (4, 3, 1.0, 4.0, 0.0),
    (5, 0, -1.0, -2.0, 0.0),
    (5, 4, 0.5, 2.0, 0.0),
    (5, 2, 1.0, 8 / 3, -8 / 9),
])
def test_expected_slope(n, k, lam, slope, product):
    s, p = expected_slope(RigidSpec(n, k, lam))
    assert s == pytest.approx(slope, rel=1e-15)
    assert p == pytest.approx(product, abs=1e-15)
    assert (s - 2 * lam) * (s - 4 * lam) == pytest.approx(p, abs=1e-14)


def test_expected_slope_needs_a_flat_factor():
    with pytest.raises(RigidSpecError):
        expected_slope(RigidSpec(3, 3, 1.0))


def test_dilated_flat_factor_still_a_soliton():
    sd = cylinder(3, 0.5, flat_scale=2.0)
    assert verify(sd).passed
    assert sd.chart.domain[0] == (-1.0, 1.0)


def test_perturbed_gaussian_fails():
    rep = verify(perturbed_gaussian(4, -1.0, eps=0.01), samples=10)
    assert rep["soliton_equation"].residual == pytest.approx(0.01 * 2.0, rel=1e-10)  # eps |lambda| sqrt(n)
