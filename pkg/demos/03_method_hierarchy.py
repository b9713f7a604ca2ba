"""The seven-method hierarchy at one point of construction.

Runs every method on the same bivariate benchmark function and shows how
the tightness metric improves from scalar to diagonal to matrix scalings,
and how the shift behaves where the tangent is invalid.
"""

from dcquad import benchgen, construct, metric
from dcquad.errors import ShiftRequired
from dcquad.quadue import METHODS

f = benchgen.coconut_function("dipigri")
x0 = [1.84, -1.04]

print(f"function {f.name}, x0 = {x0}\n")
print(f"{'method':>6} {'metric':>8} {'gamma':>8} {'iters':>6} {'LPs':>4}")
for m in METHODS:
    u, rep = construct(f, x0, m, eps=1e-3, seed=3)
    val = metric(f, u).value
    print(f"{m:>6} {val:8.4f} {u.gamma:8.4f} {rep.iterations:6d} "
          f"{rep.lp_solves:4d}")

# where the tangent overestimates, methods without shift must refuse
g = benchgen.coconut_function("ex4_1_6")
print("\nex4_1_6 at x0 = -0.125 (tangent invalid there):")
for m in ("S", "D", "M", "SS", "UDS"):
    try:
        u, _ = construct(g, [-0.125], m, eps=1e-3, seed=1)
        print(f"  {m}: converged with gamma = {u.gamma:.4f}")
    except ShiftRequired:
        print(f"  {m}: shift required")
