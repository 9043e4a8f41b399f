"""
Curvature of a metric written in coordinates
============================================

A metric is a matrix of expressions in the chart coordinates. Everything
downstream (Christoffel symbols, Riemann, Ricci, Weyl, Cotton, Bach) is
computed from exact symbolic derivatives, evaluated in batches with numpy.
"""

import math

import numpy as np

from schouten.conformal import conformal_batch
from schouten.geometry import Chart, curvature_pack, geometry_jets

# The round 2-sphere of radius 2 in colatitude / longitude.
s2 = Chart(["th", "ph"], [["4", "0"], ["0", "4 * sin(th)^2"]],
           [(0.2, math.pi - 0.2), (-math.pi, math.pi)], name="S2(r=2)")
pack = curvature_pack(s2, [1.0, 0.3])
print("R on S^2 of radius 2:", pack.scalar)  # 2 / r^2 = 0.5
print("Gamma^th_phph:", pack.christoffel[0, 1, 1])

# Batches are cheap: one call evaluates every sample point.
pts = s2.sample(1000)
R = geometry_jets(s2, pts, order=2).scalar.value
print("spread of R over 1000 points:", np.ptp(R))

# S^2 x R in dimension 3. Weyl vanishes in dimension three by algebra, the
# Cotton tensor vanishes because the metric is locally conformally flat.
cyl = Chart(["x", "th", "ph"],
            [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "sin(th)^2"]],
            [(-2, 2), (0.2, math.pi - 0.2), (-math.pi, math.pi)], name="R x S2")
for p in conformal_batch(cyl, cyl.sample(3)):
    print(p.point.round(3), "max|W| =", np.abs(p.weyl).max(), " max|C| =", np.abs(p.cotton).max())

# A warped metric that is not conformally flat: Bach is computed twice, once
# from the Weyl tensor and once from the Cotton tensor, and the two agree.
warped = Chart(["t", "u", "v", "w"],
               [["1", "0", "0", "0"],
                ["0", "exp(t)", "0", "0"],
                ["0", "0", "exp(2*t)", "0"],
                ["0", "0", "0", "1 + t^2"]],
               [(-1, 1)] * 4, name="warped")
for p in conformal_batch(warped, warped.sample(3)):
    print("Bach from Weyl vs from Cotton, relative gap:", p.bach_audit)
    print(np.array2string(p.bach, precision=4, suppress_small=True))
