"""
Rigid Schouten solitons and what the checks see
================================================

The rigid family is a flat factor R^(n-k) times an Einstein factor N^k with a
quadratic potential on the flat factor. We build a few members, run the
pointwise identity suite, look at the two-eigenvalue defect
R^2 - (n-1)|Ric|^2, and ask the classifier for a verdict.
"""

import numpy as np

from schouten.classify import classify
from schouten.rigid import RigidSpec, build_rigid, perturbed_gaussian
from schouten.soliton import SolitonSample, verify

specs = [RigidSpec(3, 0, 1.0),    # Gaussian shrinker
         RigidSpec(3, 2, 0.5),    # R x S^2
         RigidSpec(4, 3, -1.0),   # R x H^3, expanding
         RigidSpec(5, 2, 1.0),    # R^3 x S^2, neither Gaussian nor a cylinder
         RigidSpec(4, 4, 1.0)]    # S^4, constant potential

for spec in specs:
    sd = build_rigid(spec)
    rep = verify(sd, samples=30)
    print(f"{sd.chart.name:40s} all checks pass: {rep.passed}, "
          f"soliton residual {rep['soliton_equation'].residual:.1e}")

# The defect is zero on Gaussians and cylinders and strictly negative on the
# R^3 x S^2 product, where Ric has three distinct eigenvalues 0, 0 and 1.
for spec in specs[:4]:
    sd = build_rigid(spec)
    s = SolitonSample(sd, sd.chart.sample(20))
    d = s.R**2 - (sd.n - 1) * s.ric_norm2
    print(f"{str(spec):50s} defect in [{d.min():+.4f}, {d.max():+.4f}]")

# Verdicts carry their evidence.
for sd in [build_rigid(s) for s in specs] + [perturbed_gaussian(3, 1.0)]:
    print()
    print(sd.chart.name)
    print(classify(sd))

# Scaling f by 1.01 breaks the equation by exactly 1% of lambda g.
rep = verify(perturbed_gaussian(3, 1.0, eps=0.01), samples=10)
print("\nperturbed residual:", rep["soliton_equation"].residual, "~", 0.01 * np.sqrt(3))
