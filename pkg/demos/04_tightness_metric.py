"""The hypervolume tightness metric.

metric = integral(q - l) / integral(f - l) against the tangent baseline l
at the same point of construction: 0 means q adds nothing over the tangent,
1 means q recovers f.  Both integrals share one point set, so pointwise
ordering of underestimators transfers to the metric exactly.
"""

import numpy as np

from dcquad import BoxDomain, DcFunction, construct, metric, parse_expr
from dcquad.quadue import QuadUnderestimator

# a convex quadratic is recovered exactly: metric 1
f = DcFunction(parse_expr("x1^2 + x2^2"), parse_expr("0"),
               BoxDomain([-1.0, -1.0], [1.0, 1.0]))
u, _ = construct(f, [0.3, -0.4], "S", seed=0)
print("exact quadratic:", metric(f, u).value)

# freezing the quadratic term to zero leaves only the tangent: metric 0
frozen = QuadUnderestimator(u.x0, u.f0, u.grad0, u.eig,
                            np.zeros((2, 2)), 0.0, "S", True)
print("bare tangent:   ", metric(f, frozen).value)

# intermediate scalings interpolate monotonically
for alpha in (0.25, 0.5, 0.75):
    v = QuadUnderestimator(u.x0, u.f0, u.grad0, u.eig,
                           alpha * np.eye(2), 0.0, "S", True)
    print(f"alpha = {alpha}:    ", round(metric(f, v).value, 6))

# where a shift is required, tightness is measured against the shifted
# tangent produced by method SS (which scores 0 against itself)
from dcquad import benchgen

g = benchgen.coconut_function("sisser")
x0 = [0.1, -0.2]
ss, _ = construct(g, x0, "SS", seed=3)
ms, _ = construct(g, x0, "MS", seed=3)
print("\nshift-required point on sisser:")
print("SS against itself:", metric(g, ss, baseline=ss).value)
print("MS against SS:    ", round(metric(g, ms, baseline=ss).value, 4))
