import numpy as np
import pytest

from dcquad import benchgen as bg
from dcquad import dcexpr as dx
from dcquad import linops as lo
from dcquad import quadue as qd
from dcquad import relaxbound as rb
from dcquad.errors import InfeasibleInstance, InvalidConfig, NoValidPoint


def exact_quadratic_entry(x0, hess):
    """UnderEntry for q equal to the quadratic centered at x0 with value 0."""
    n = len(x0)
    u = qd.QuadUnderestimator(np.asarray(x0, float), 0.0, np.zeros(n),
                              lo.sym_eig(np.asarray(hess, float)), np.eye(n),
                              0.0, "S", True)
    return rb.UnderEntry(u, 0.0)


def test_kelley_single_quadratic():
    f = dx.DcFunction(dx.parse_expr("x1^2"), dx.Const(0.0),
                      dx.BoxDomain([-1.0], [1.0]))
    prob = bg.ProblemInstance("toy", f, [])
    r = rb.QcqpRelaxation(prob, [exact_quadratic_entry([0.0], [[2.0]])], [],
                          4, "DS", 0)
    res = rb.solve_qcqp(r, tol=1e-6)
    assert res.status == "optimal"
    assert res.bound == pytest.approx(0.0, abs=1e-6)


def test_kelley_projection_onto_halfspace():
    # min (x-1)^2 + (y-1)^2 subject to x + y <= 1 -> 1/2 at (1/2, 1/2)
    f = dx.DcFunction(dx.parse_expr("(x1 - 1)^2 + (x2 - 1)^2"), dx.Const(0.0),
                      dx.BoxDomain([-1.0, -1.0], [1.0, 1.0]))
    lin = bg.Constraint("linear", dx.DcFunction(dx.parse_expr("x1 + x2"),
                                                dx.Const(0.0), f.box), 1.0)
    prob = bg.ProblemInstance("toy2", f, [lin])
    r = rb.QcqpRelaxation(prob, [exact_quadratic_entry([1.0, 1.0],
                                                       [[2.0, 0.0], [0.0, 2.0]])],
                          [], 4, "DS", 0)
    res = rb.solve_qcqp(r, tol=1e-6)
    assert res.bound == pytest.approx(0.5, abs=1e-5)
    trace = np.asarray(res.trace)
    assert np.all(np.diff(trace) >= -1e-9)


def test_build_relaxation_counts():
    objective = bg.dc_composition((2, 2))
    con = bg.Constraint("dc", bg.dc_composition((2, 3)), 0.5)
    prob = bg.ProblemInstance("counts", objective, [con])
    r = rb.build_relaxation(prob, per_dim=4, seed=0)
    assert len(r.objective_ues) == 8
    assert len(r.constraint_ues) == 8
    for e in r.objective_ues:
        assert e.u.converged and e.margin >= 0.0
        assert lo.sym_eig(e.u.curvature_matrix).eigenvalues[-1] >= -1e-8


def test_build_relaxation_rejects_zero_per_dim():
    prob = bg.ProblemInstance("bad", bg.dc_composition((1,)), [])
    with pytest.raises(InvalidConfig):
        rb.build_relaxation(prob, per_dim=0)


def test_no_valid_point_for_concave_function():
    f = dx.DcFunction(dx.Const(0.0), dx.parse_expr("x1^2"),
                      dx.BoxDomain([-1.0], [1.0]))
    prob = bg.ProblemInstance("concave", f, [])
    with pytest.raises(NoValidPoint):
        rb.build_relaxation(prob, per_dim=2, seed=0)


def test_reference_optimum_unconstrained_quadratic():
    f = dx.DcFunction(dx.parse_expr("x1^2"), dx.Const(0.0),
                      dx.BoxDomain([-1.0], [1.0]))
    prob = bg.ProblemInstance("sq", f, [])
    assert rb.reference_optimum(prob) == pytest.approx(0.0, abs=1e-9)


def test_reference_optimum_infeasible():
    f = bg.dc_composition((1,))
    con = bg.Constraint("convex", dx.DcFunction(dx.parse_expr("x1^2"),
                                                dx.Const(0.0), f.box), -5.0)
    prob = bg.ProblemInstance("void", f, [con])
    with pytest.raises(InfeasibleInstance):
        rb.reference_optimum(prob)


def test_linear_objective_baseline_equals_quadratic():
    f = dx.DcFunction(dx.parse_expr("x1 + 0.5*x2"), dx.Const(0.0),
                      dx.BoxDomain([-1.0, -1.0], [1.0, 1.0]))
    prob = bg.ProblemInstance("lin", f, [])
    r = rb.build_relaxation(prob, per_dim=2, seed=0)
    quad = rb.solve_qcqp(r, tol=1e-8).bound
    base = rb.baseline_linear_bound(prob, per_dim=2, seed=0, tol=1e-8)
    assert quad == pytest.approx(base, abs=1e-7)
    assert quad == pytest.approx(-1.5, abs=1e-6)


def test_convex_quadratic_baseline_dominated():
    f = dx.DcFunction(dx.parse_expr("x1^2 + x2^2"), dx.Const(0.0),
                      dx.BoxDomain([-1.0, -1.0], [1.0, 1.0]))
    prob = bg.ProblemInstance("cq", f, [])
    r = rb.build_relaxation(prob, per_dim=2, seed=0)
    quad = rb.solve_qcqp(r, tol=1e-8).bound
    base = rb.baseline_linear_bound(prob, per_dim=2, seed=0, tol=1e-8)
    assert quad >= base - 1e-8
    # the certified validity margin (<= eps) pushes the bound just below 0
    assert -1.2e-3 <= quad <= 1e-6


def test_study_problem_first_bundled():
    p = bg.bundled_problems()[0]
    res = rb.study_problem(p, per_dim=4, seed=0)
    assert res.status == "optimal"
    assert res.lower_bound <= res.reference_optimum + 1e-6
    assert res.baseline_bound <= res.lower_bound + 1e-8
    assert res.constructions == 12     # 3 nonlinear functions x 4 points


def test_study_determinism():
    p = bg.bundled_problems()[0]
    a = rb.study_problem(p, per_dim=2, seed=7)
    b = rb.study_problem(p, per_dim=2, seed=7)
    assert a.lower_bound == b.lower_bound
    assert a.baseline_bound == b.baseline_bound
    assert a.reference_optimum == b.reference_optimum
    assert a.gap_reduction == b.gap_reduction
