"""Root-node bounds from convex QCQP relaxations.

Every nonlinear function of a problem is underestimated at 4 n locally
convex Latin-hypercube points (method DS); the resulting convex QCQP is
bounded by Kelley's cutting-plane loop over the built-in simplex.  The
same pipeline with zero-curvature (shifted tangent) underestimators gives
the linear baseline, and a dense feasible search gives the reference
optimum, so the improvement is reported as a gap reduction.
"""

import time

from dcquad import benchgen, relaxbound

for idx in (0, 6):                     # one univariate, one bivariate
    p = benchgen.bundled_problems()[idx]
    t0 = time.perf_counter()
    res = relaxbound.study_problem(p, per_dim=4, seed=0)
    dt = time.perf_counter() - t0
    print(f"{p.name} (n = {res.n}, {len(p.constraints)} constraints)")
    print(f"  quadratic relaxation bound : {res.lower_bound:+.6f}")
    print(f"  linear baseline bound      : {res.baseline_bound:+.6f}")
    print(f"  reference optimum          : {res.reference_optimum:+.6f}")
    print(f"  gap closed by quadratics   : {res.gap_reduction:.1%}")
    print(f"  Kelley iterations / cuts   : {res.solver_iterations} / "
          f"{res.total_cuts}   ({dt:.1f}s)\n")

print("The bound never exceeds the reference optimum: each underestimator")
print("is lowered by its certified construction slack, so the relaxation")
print("is rigorously valid even though the cutting plane stops at eps.")
