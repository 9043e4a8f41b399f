import numpy as np
import pytest

from schouten.soliton import verify
from schouten.specfile import (
    DimensionMismatchError,
    MissingKeyError,
    SpecFileError,
    dumps_spec,
    fixture,
    load_spec,
    loads_spec,
    resolve,
)

CYL = """\
# round S^2 times a line
[chart]
dim = 3
coords = x t phi
g[1][1] = 1
g[2][2] = 1
g[3][3] = sin(t)^2
domain[1] = -2 2
domain[2] = 0.2 2.94
domain[3] = -3.14 3.14
[potential]
f = 0.5 * x^2   # lambda x^2 / 2
lambda = 0.5
"""

FIXTURES = [
    "gaussian:n=3,lambda=1",
    "gaussian:n=4,lambda=-1",
    "cylinder:n=3,k=2,lambda=0.5",
    "cylinder:n=4,lambda=1",
    "rigid:n=5,k=2,lambda=1",
    "einstein:n=4,lambda=-1",
    "perturbed-gaussian:n=3,eps=0.02",
    "cylinder:n=3,lambda=0.5,scale=2",
]


def _eval_metric(sd, pts):
    return sd.chart.metric_values(pts)


def test_load_cylinder_text():
    sd = loads_spec(CYL)
    assert sd.chart.coords == ("x", "t", "phi")
    assert sd.lam == 0.5 and sd.f0 is None
    assert verify(sd, samples=10).passed


def test_load_from_file(tmp_path):
    p = tmp_path / "cyl.spec"
    p.write_text(CYL)
    sd = load_spec(p)
    assert sd.chart.name == "cyl.spec"
    assert resolve(str(p)).chart.coords == sd.chart.coords


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip(name):
    sd = fixture(name)
    text = dumps_spec(sd)
    back = loads_spec(text)
    assert back.chart.coords == sd.chart.coords
    assert back.chart.domain == sd.chart.domain
    assert back.lam == sd.lam and back.f0 == sd.f0
    pts = sd.chart.sample(10, 3)
    np.testing.assert_array_equal(_eval_metric(back, pts), _eval_metric(sd, pts))
    assert dumps_spec(back).split("\n", 1)[1] == text.split("\n", 1)[1]


def test_params_and_off_diagonal():
    text = """
[chart]
dim = 2
coords = u v
g[1][1] = a
g[1][2] = c
g[2][2] = a
domain[1] = -1 1
domain[2] = -1 1
[potential]
f = lam * (u^2 + v^2) / 2
lambda = 2 / 2
[params]
a = 2
c = 0.5
lam = 1
"""
    sd = loads_spec(text)
    g = sd.chart.metric_values(np.zeros((1, 2)))[0]
    np.testing.assert_array_equal(g, [[2.0, 0.5], [0.5, 2.0]])
    assert sd.lam == 1.0
    assert dict(sd.chart.params) == {"a": 2.0, "c": 0.5, "lam": 1.0}
    assert "[params]" in dumps_spec(sd)


def _error(text):
    with pytest.raises(SpecFileError) as exc:
        loads_spec(text)
    return exc.value


def test_dimension_mismatch():
    e = _error(CYL.replace("coords = x t phi", "coords = x t"))
    assert isinstance(e, DimensionMismatchError) and e.line == 4
    e = _error(CYL.replace("g[3][3]", "g[4][4]"))
    assert isinstance(e, DimensionMismatchError) and e.line == 7


def test_missing_keys():
    assert isinstance(_error(CYL.replace("lambda = 0.5\n", "")), MissingKeyError)
    e = _error(CYL.replace("domain[2] = 0.2 2.94\n", ""))
    assert isinstance(e, MissingKeyError) and "domain[2]" in str(e)
    assert isinstance(_error(CYL.replace("g[2][2] = 1\n", "")), MissingKeyError)


@pytest.mark.parametrize("old, new, line, words", [
    ("g[2][2] = 1", "g[2][2] = 1 +", 6, "g[2][2]"),
    ("f = 0.5 * x^2", "f = 0.5 * y^2", 12, "undeclared"),
    ("lambda = 0.5", "lambda = x", 13, "constant"),
    ("domain[1] = -2 2", "domain[1] = 2 -2", 8, "lo < hi"),
    ("domain[1] = -2 2", "domain[1] = -2", 8, "two numbers"),
    ("dim = 3", "dim = three", 3, "integer"),
    ("[potential]", "[pot]", 11, "unknown section"),
    ("g[2][2] = 1", "g[2][2] = 1\ng[2][2] = 2", 7, "duplicate"),
    ("g[2][2] = 1", "g[2][2] = 1\ng[3][1] = 0\ng[1][3] = 0", 8, "twice"),
    ("g[2][2] = 1", "g[2][2] = 1\nmetric = 1", 7, "unknown key"),
    ("lambda = 0.5", "lambda = 0.5\nmu = 1", 14, "unknown key"),
    ("dim = 3", "dim 3", 3, "key = value"),
])
def test_errors_carry_line_numbers(old, new, line, words):
    e = _error(CYL.replace(old, new))
    assert e.line == line
    assert str(e).startswith(f"line {line}: ")
    assert words in str(e)


def test_entry_outside_section():
    e = _error("dim = 3\n" + CYL)
    assert e.line == 1


def test_bad_metric_is_reported():
    e = _error(CYL.replace("g[1][1] = 1", "g[1][1] = -1"))
    assert e.line is None and "positive definite" in str(e)


def test_builtin_fixture_names():
    sd = fixture("gaussian:n=3,lambda=1")
    assert sd.kind == "gaussian" and sd.n == 3 and sd.lam == 1.0
    sd = fixture("cylinder:n=3,k=2,lambda=0.5")
    assert sd.kind == "cylinder" and sd.lam == 0.5
    assert fixture("rigid:n=5,k=2,lambda=1").meta["rigid"].k == 2
    assert resolve("einstein:n=3").lam == 1.0


@pytest.mark.parametrize("bad", [
    "torus:n=3",
    "gaussian:lambda=1",
    "gaussian:n=3,k=1",
    "gaussian:n=3,mu=2",
    "rigid:n=4,lambda=1",
    "cylinder:n=3,lambda=abc",
    "cylinder:n=4,k=1",
    "gaussian:n=3,lambda",
    "no/such/file.spec",
])
def test_bad_fixture_names(bad):
    with pytest.raises(SpecFileError):
        resolve(bad)
