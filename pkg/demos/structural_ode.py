"""
The structural ODE and integral curves of grad f
================================================

Along an integral curve alpha' = grad f / |grad f|^2 the potential grows at
unit rate and b = |grad f|^2 is a function of s alone. In the equality case b
satisfies b'' = (b' - 2 lambda)(b' - 4 lambda) / b, which has the first
integral sigma0 = (b' - 4 lambda)^2 / (b (b' - 2 lambda)).
"""

import numpy as np

from schouten.ode import (
    first_integral,
    inequality_check,
    integrate_equality_ode,
    rewriting_checks,
    trace_integral_curve,
)
from schouten.rigid import RigidSpec, build_rigid, expected_slope

lam = 1.0

# Two straight-line solutions: b' = 2 lambda and b' = 4 lambda.
for slope in (2 * lam, 4 * lam):
    t = integrate_equality_ode(lam, 0.1 * slope, slope, (0.0, 10.0), 1e-3)
    print(f"b' = {slope}: max deviation from a line {np.abs(np.diff(t.b) / t.h - slope).max():.1e}")

# A generic solution keeps sigma0 fixed.
t = integrate_equality_ode(lam, 1.0, 3.0, (0.0, 10.0), 1e-3)
fi = first_integral(t)
print(f"sigma0 = {fi.sigma0}, drift over s in [0, 10]: {fi.drift:.1e}")
print("rewriting residuals:", rewriting_checks(t, lam))

# RK4 is fourth order: halving h divides the error by about 16.
ref = integrate_equality_ode(lam, 1.0, 3.0, (0.0, 5.0), 0.1 / 64).b[-1]
errs = [abs(integrate_equality_ode(lam, 1.0, 3.0, (0.0, 5.0), h).b[-1] - ref) for h in (0.2, 0.1, 0.05)]
print("errors:", ["%.2e" % e for e in errs], "ratios:", [round(float(errs[i] / errs[i + 1]), 2) for i in range(2)])

# On a rigid soliton the traced b is linear with the predicted slope.
for spec, start in [(RigidSpec(3, 0, lam), [1.0, 0.0, 0.0]),
                    (RigidSpec(3, 2, 0.5), [0.5, 1.0, 0.0]),
                    (RigidSpec(5, 2, lam), [0.3, 0.2, 0.1, 1.0, 0.0])]:
    tr = trace_integral_curve(build_rigid(spec), start, (0.0, 0.5), 1e-3)
    chk = inequality_check(tr, spec.lam, spec.n)
    print(f"{str(spec):45s} slope {chk.slope_mean:.6f} (expected {expected_slope(spec)[0]:.6f}), "
          f"(b'-2l)(b'-4l) = {chk.product_max:+.4f}")
