"""Expression trees: parsing, exact derivatives, and range scaling.

The library evaluates values, gradients, and Hessians of parsed expressions
by forward-mode accumulation, so derivatives are exact (no finite
differencing).  Range scaling multiplies a d.c. function by
1/max{|min f|, |max f|} so its range fits in [-1, 1].
"""

import numpy as np

from dcquad import BoxDomain, DcFunction, hessian, parse_expr, scale_range

# the cubic-minus-quadratic benchmark body: f(x) = x^3 - 6 x^2 on [0, 8]
h = parse_expr("x1^3")
g = parse_expr("6*x1^2")
f = DcFunction(h, g, BoxDomain([0.0], [8.0]), name="zy2")

print("f(2)      =", f.value([2.0]))                 # -16
print("f'(5.24)  =", f.grad([5.24])[0])              # 3x^2 - 12x = 19.4928
print("f''(5.24) =", f.hessian([5.24])[0, 0])        # 6x - 12

# curvature flips sign for this quartic: locally convex at 0.15, not at 0.85
e = parse_expr("3*x1^3 - 2.5*x1^4")
print("\ncurvature at 0.15:", hessian(e, [0.15])[0, 0])
print("curvature at 0.85:", hessian(e, [0.85])[0, 0])

# batch evaluation over many points at once
xs = np.linspace(0.0, 8.0, 5)[:, None]
print("\nf on a grid:", f.value_many(xs))

# range scaling: |min f| = 32, |max f| = 128 -> s = 1/128
fs = scale_range(f)
print("\nscale factor:", fs.scale, "= 1/128 =", 1.0 / 128.0)
print("scaled range touches 1:", fs.value([8.0]))

# domain guards are certified at construction: log needs a positive box
try:
    DcFunction(parse_expr("log(x1)"), parse_expr("0"), BoxDomain([-1.0], [1.0]))
except Exception as exc:
    print("\nguard rejected log over a box crossing zero:", type(exc).__name__)
