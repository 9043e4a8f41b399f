import math

import numpy as np
import pytest
import sympy

from schouten.geometry import Chart


def central_weights(deriv: int, accuracy: int = 8):
    """Central finite-difference weights from sympy (independent oracle)."""
    half = (deriv + 1) // 2 - 1 + accuracy // 2
    offsets = list(range(-half, half + 1))
    w = sympy.finite_diff_weights(deriv, offsets, 0)[deriv][-1]
    return np.array(offsets, dtype=float), np.array([float(c) for c in w])


def fd_derivative(fun, x: float, deriv: int = 1, h: float = 1e-2, accuracy: int = 8) -> float:
    offsets, w = central_weights(deriv, accuracy)
    return float(sum(wi * fun(x + o * h) for o, wi in zip(offsets, w)) / h**deriv)


def flat_chart(n=3, half=1.0):
    coords = [f"x{i + 1}" for i in range(n)]
    g = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    return Chart(coords, g, [(-half, half)] * n, name=f"flat{n}")


def sphere2(radius=1.0):
    r2 = repr(radius * radius)
    return Chart(["th", "ph"], [[r2, "0"], ["0", f"{r2} * sin(th)^2"]],
                 [(0.2, math.pi - 0.2), (-math.pi, math.pi)], name="S2")


def polar_plane():
    return Chart(["r", "ph"], [["1", "0"], ["0", "r^2"]], [(0.5, 2.0), (-math.pi, math.pi)], name="polar")


def sphere4(radius=1.0):
    """Round S^4 in nested colatitudes."""
    r2 = repr(radius * radius)
    diag = [r2, f"{r2} * sin(a)^2", f"{r2} * sin(a)^2 * sin(b)^2", f"{r2} * sin(a)^2 * sin(b)^2 * sin(c)^2"]
    g = [[diag[i] if i == j else "0" for j in range(4)] for i in range(4)]
    box = (0.3, math.pi - 0.3)
    return Chart(["a", "b", "c", "d"], g, [box, box, box, (-math.pi, math.pi)], name="S4")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
