import numpy as np
import pytest

from dcquad import dcexpr as dx
from dcquad import linops as lo
from dcquad import quadue as qd
from dcquad.errors import DegenerateCurvature, NotLocallyConvex, ShiftRequired
from dcquad.tightness import latin_hypercube


def make_fn(h, g, lo_, hi_, name=None):
    return dx.DcFunction(dx.parse_expr(h), dx.parse_expr(g),
                         dx.BoxDomain(lo_, hi_), name=name)


@pytest.fixture(scope="module")
def zy2_scaled():
    return dx.scale_range(make_fn("x1^3", "6*x1^2", [0.0], [8.0], "zy2"))


@pytest.fixture(scope="module")
def ex416_scaled():
    return dx.scale_range(make_fn("27*x1^2 + x1^6 + 250", "15*x1^4",
                                  [-5.0], [5.0], "ex4_1_6"))


@pytest.fixture(scope="module")
def dipigri_scaled():
    return dx.scale_range(make_fn("x2^4 + 9*x1^2 + 2*x2^2", "2*(x1 + x2)^2",
                                  [-3.0, -3.0], [3.0, 3.0], "dipigri"))


def quad_of(u):
    return u.curvature_matrix


# ---------------------------------------------------------------------------
# q evaluation


def test_q_at_x0_returns_f0():
    f = make_fn("x1^2", "0", [-1.0], [1.0])
    u, _ = qd.construct(f, [0.25], "S", seed=0)
    assert qd.q_eval(u, [0.25]) == pytest.approx(f.value([0.25]) - u.gamma,
                                                 abs=1e-12)


def test_q_identity_scaling_reproduces_quadratic():
    f = make_fn("x1^2", "0", [-3.0], [3.0])
    u, _ = qd.construct(f, [0.0], "S", seed=0)
    assert u.a[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert qd.q_eval(u, [2.0]) == pytest.approx(4.0, abs=1e-10)


def test_q_zero_scaling_is_linear_part():
    f = make_fn("x1^2", "0", [-1.0], [1.0])
    u, _ = qd.construct(f, [0.5], "S", seed=0)
    frozen = qd.QuadUnderestimator(u.x0, u.f0, u.grad0, u.eig,
                                   np.zeros((1, 1)), 0.0, "S", True)
    pts = np.linspace(-1, 1, 9)[:, None]
    assert np.allclose(frozen.evaluate_many(pts), frozen.linear_many(pts))


# ---------------------------------------------------------------------------
# local convexity and scalar updates


def test_local_convexity_examples():
    f = make_fn("3*x1^3", "2.5*x1^4", [0.0], [1.0])
    ok, dec = qd.check_local_convexity(f, [0.15])
    assert ok and dec.eigenvalues[0] == pytest.approx(2.025, abs=1e-12)
    ok, _ = qd.check_local_convexity(f, [0.85])
    assert not ok


def test_local_convexity_convex_quadratic_everywhere():
    f = make_fn("x1^2 + x2^2", "0", [-1.0, -1.0], [1.0, 1.0])
    for x0 in ([0.0, 0.0], [0.5, -0.5], [-1.0, 1.0]):
        ok, _ = qd.check_local_convexity(f, x0)
        assert ok


def test_update_scalar_quartic_equality_oracle():
    # alpha solving q(x*) = f(x*) for f = x^4, x0 = 0.5, x* = -1:
    # 0.0625 + 0.5(x - 0.5) + 1.5 alpha (x - 0.5)^2 = 1 at x = -1 -> 0.5
    f = make_fn("x1^4", "0", [-1.0], [1.0])
    alpha = qd.update_scalar(f, [0.5], [-1.0], 1.0)
    assert alpha == pytest.approx(0.5, abs=1e-12)


def test_update_scalar_exact_quadratic_is_one():
    f = make_fn("x1^2", "0", [-1.0], [1.0])
    for xs in (-1.0, 0.3, 0.9):
        assert qd.update_scalar(f, [0.1], [xs], 1.0) == pytest.approx(1.0)


def test_update_scalar_degenerate_curvature():
    f = make_fn("2*x1", "0", [-1.0], [1.0])
    with pytest.raises(DegenerateCurvature):
        qd.update_scalar(f, [0.0], [0.5], 1.0)


def test_update_shift_scalar_definition():
    # tangent of -x^2 at 0 is 0; it overestimates by x*^2
    f = make_fn("0", "x1^2", [-1.0], [1.0])
    gamma = qd.update_shift_scalar(f, [0.0], [np.sqrt(0.3)], 0.0)
    assert gamma == pytest.approx(0.3, abs=1e-12)


# ---------------------------------------------------------------------------
# LP shapes (also exercised in the acceptance suite)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_lp_shapes(n):
    box = dx.BoxDomain(-np.ones(n), np.ones(n))
    f = dx.DcFunction(dx.parse_expr("+".join(f"x{i+1}^2" for i in range(n))),
                      dx.Const(0.0), box)
    eig = lo.sym_eig(f.hessian(np.zeros(n)))
    smp = latin_hypercube(box, 100 * n, 0).points
    xstar = 0.9 * np.ones(n)
    lp_d = qd.build_lp("D", False, f, np.zeros(n), eig, np.eye(n), 0.0, xstar, smp)
    assert lp_d.num_rows == 2 * n + 1
    assert lp_d.num_vars == n
    lp_d1 = qd.build_lp("D", True, f, np.zeros(n), eig, np.eye(n), 0.0, xstar, smp)
    assert lp_d1.num_rows == 100 * n + 2 * n + 1
    lp_m = qd.build_lp("M", False, f, np.zeros(n), eig, np.eye(n), 0.0, xstar, smp)
    assert lp_m.num_vars == n * n + 2 * n * (n - 1)
    assert lp_m.num_rows == 4 * n + 5 * n * (n - 1) + 1
    lp_ds = qd.build_lp("DS", False, f, np.zeros(n), eig, np.eye(n), 0.0, xstar, smp)
    assert lp_ds.num_vars == n + 1
    assert lp_ds.num_rows == 2 * n + 2
    lp_uds = qd.build_lp("UDS", False, f, np.zeros(n), eig, np.eye(n), 0.0, xstar, smp)
    assert lp_uds.num_rows == 2 * n + 2 + (n - 1)


# ---------------------------------------------------------------------------
# construction


def test_construct_exact_quadratic_no_updates():
    f = make_fn("x1^2", "0", [-1.0], [1.0])
    u, rep = qd.construct(f, [0.0], "S", seed=1)
    assert u.a[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert u.gamma == 0.0
    assert rep.lp_solves == 0
    assert rep.final_bound >= -1e-3


def test_construct_scalar_matches_grid_oracle(zy2_scaled):
    f = zy2_scaled
    u, rep = qd.construct(f, [5.24], "S", seed=1)
    xs = np.linspace(0.0, 8.0, 100001)[:, None]
    f0, g0, h0 = f.value_grad_hessian([5.24])
    d = xs[:, 0] - 5.24
    ratio_den = h0[0, 0] * d * d
    mask = ratio_den > 1e-14
    ratios = 2.0 * (f.value_many(xs)[mask]
                    - (f0 + g0[0] * d[mask])) / ratio_den[mask]
    assert u.a[0, 0] == pytest.approx(float(ratios.min()), abs=1e-2)
    # validity on the same grid
    assert np.max(u.evaluate_many(xs) - f.value_many(xs)) <= 2e-3


def test_construct_quartic_tightest_alpha_oracle():
    f = make_fn("x1^4", "0", [-1.0], [1.0])
    u, _ = qd.construct(f, [0.5], "S", seed=2)
    xs = np.linspace(-1.0, 1.0, 100001)[:, None]
    d = xs[:, 0] - 0.5
    den = 3.0 * d * d
    mask = den > 1e-14
    ratios = 2.0 * (xs[mask, 0] ** 4 - (0.0625 + 0.5 * d[mask])) / den[mask]
    assert u.a[0, 0] == pytest.approx(float(ratios.min()), abs=1e-2)


def test_construct_shift_detection_pair(ex416_scaled):
    with pytest.raises(ShiftRequired):
        qd.construct(ex416_scaled, [-0.125], "S", seed=1)
    u, _ = qd.construct(ex416_scaled, [-0.125], "UDS", seed=1)
    assert u.gamma > 0.0
    xs = np.linspace(-5.0, 5.0, 20001)[:, None]
    assert np.max(u.evaluate_many(xs) - ex416_scaled.value_many(xs)) <= 2e-3


def test_construct_ss_completes_where_s_fails(ex416_scaled):
    u, _ = qd.construct(ex416_scaled, [-0.125], "SS", seed=1)
    assert u.gamma > 0.0
    assert np.all(u.a == 0.0)


def test_construct_not_locally_convex():
    f = make_fn("3*x1^3", "2.5*x1^4", [0.0], [1.0])
    with pytest.raises(NotLocallyConvex):
        qd.construct(f, [0.85], "S", seed=0)


def test_sisser_pathology_single_point():
    f = dx.scale_range(make_fn("4*x1^2 + 4*x2^2", "(x1^2 + x2^2)^2",
                               [-3.0, -3.0], [3.0, 3.0], "sisser"))
    x0 = [0.1, -0.2]
    for m in ("S", "D", "M"):
        with pytest.raises(ShiftRequired):
            qd.construct(f, x0, m, seed=3)
    for m in ("SS", "UDS", "DS", "MS"):
        u, _ = qd.construct(f, x0, m, seed=3)
        assert u.gamma > 0.0


def test_all_methods_validity_and_invariants(dipigri_scaled):
    f = dipigri_scaled
    x0 = [1.84, -1.04]
    pts = f.box.lower + np.random.default_rng(0).random((20000, 2)) * f.box.width
    fv = f.value_many(pts)
    for m in qd.METHODS:
        u, rep = qd.construct(f, x0, m, seed=3)
        assert np.max(u.evaluate_many(pts) - fv) <= 2e-3, m
        # type invariants
        assert u.gamma >= 0.0
        if m in ("S", "D"):
            assert u.gamma == 0.0
        diag = np.diag(u.a)
        assert np.all(diag >= -1e-12) and np.all(diag <= 1.0 + 1e-9)
        if m in qd.DIAGONAL_METHODS:
            off = u.a - np.diag(diag)
            assert np.all(off == 0.0)
        assert lo.sym_eig(quad_of(u)).eigenvalues[-1] >= -1e-8
        assert qd.q_eval(u, x0) == pytest.approx(f.value(x0) - u.gamma, abs=1e-10)
        tr = np.array(rep.trace)
        assert np.all(np.diff(tr) >= -1e-9)


def test_parameter_monotonicity_and_exactness(dipigri_scaled):
    f = dipigri_scaled
    x0 = np.array([1.84, -1.04])
    rng = np.random.default_rng(9)
    pts = f.box.lower + rng.random((1000, 2)) * f.box.width
    for m in qd.METHODS:
        events = []
        u, _ = qd.construct(f, x0, m, seed=3,
                            on_update=lambda *args: events.append(args))
        q_mat = u.eig.q
        lam = u.eig.eigenvalues

        def q_values(a, gamma):
            mcurv = q_mat @ (a * lam[None, :]) @ q_mat.T
            d = pts - x0
            return (u.f0 + d @ u.grad0
                    + 0.5 * np.einsum("vi,ij,vj->v", d, mcurv, d) - gamma)

        for a_old, g_old, a_new, g_new, xstar, kind in events:
            assert np.all(q_values(a_new, g_new)
                          <= q_values(a_old, g_old) + 1e-9), m
            if kind in ("scalar", "shift"):
                d = np.asarray(xstar) - x0
                mcurv = q_mat @ (a_new * lam[None, :]) @ q_mat.T
                q_star = (u.f0 + u.grad0 @ d + 0.5 * d @ mcurv @ d - g_new)
                assert abs(q_star - f.value(xstar)) <= 1e-10, m


def test_lp_nesting_dominance(dipigri_scaled):
    f = dipigri_scaled
    x0 = np.array([1.84, -1.04])
    _, eig = qd.check_local_convexity(f, x0)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    eig = lo.EigDecomp(eig.q, lam)
    smp = latin_hypercube(f.box, 200, 5).points
    xstar = np.array([-2.7, 2.9])
    inc_a = np.eye(2)

    def optimum(method):
        lp = qd.build_lp(method, False, f, x0, eig, inc_a, 0.0, xstar, smp)
        sol = lo.solve_lp(lp)
        assert sol.status == "optimal", method
        return sol.objective

    def objective_at(alpha, gamma):
        ys = (smp - x0) @ eig.q
        quad = 0.5 * ((ys * ys) @ lam) * alpha
        return float(np.sum(quad)) - gamma * smp.shape[0]

    alpha_s = qd.update_scalar(f, x0, xstar, 1.0)
    v_s = objective_at(alpha_s, 0.0)
    assert optimum("M") >= optimum("D") - 1e-9
    assert optimum("D") >= v_s - 1e-9
    gamma_ss = max(0.0, qd.update_shift_scalar(f, x0, xstar, 0.0))
    alpha_ss = max(alpha_s, 0.0) if alpha_s >= 0 else 0.0
    v_ss = objective_at(alpha_ss, gamma_ss)
    assert optimum("MS") >= optimum("DS") - 1e-9
    assert optimum("DS") >= optimum("UDS") - 1e-9
    assert optimum("UDS") >= v_ss - 1e-9


def test_univariate_collapse_relaxed(zy2_scaled):
    # the eps band censors the final parameters; S, D and M coincide only up
    # to that censoring (exact when the binding vertex is a box corner)
    f = zy2_scaled
    for x0 in ([5.24], [6.5], [4.4]):
        res = {}
        for m in ("S", "D", "M"):
            u, _ = qd.construct(f, x0, m, seed=5)
            res[m] = (u.a[0, 0], u.gamma)
        for m in ("D", "M"):
            assert res[m][0] == pytest.approx(res["S"][0], abs=1e-4)
            assert res[m][1] == pytest.approx(res["S"][1], abs=1e-6)


def test_serialization_round_trip(dipigri_scaled):
    u, _ = qd.construct(dipigri_scaled, [1.84, -1.04], "MS", seed=3)
    rec = u.to_record()
    again = qd.QuadUnderestimator.from_record(rec)
    pts = np.random.default_rng(4).uniform(-3, 3, size=(200, 2))
    assert np.allclose(again.evaluate_many(pts), u.evaluate_many(pts),
                       atol=1e-9)
    assert again.method == u.method and again.converged


def test_force_linear_baseline(dipigri_scaled):
    u, _ = qd.construct(dipigri_scaled, [1.84, -1.04], "SS", seed=3,
                        force_linear=True)
    assert np.all(u.a == 0.0)
    pts = np.random.default_rng(1).uniform(-3, 3, size=(5000, 2))
    assert np.max(u.evaluate_many(pts) - dipigri_scaled.value_many(pts)) <= 2e-3
    with pytest.raises(ValueError):
        qd.construct(dipigri_scaled, [1.84, -1.04], "S", force_linear=True)


def test_report_fields(zy2_scaled):
    u, rep = qd.construct(zy2_scaled, [5.24], "DS", seed=1)
    assert rep.iterations > 0
    assert rep.vertices_enumerated >= 4
    assert rep.lp_solves >= 0
    assert rep.time_ms > 0.0
    assert rep.final_bound >= -1e-3 - 1e-6
    assert rep.sample_count == 100
    assert rep.failure is None


def test_x0_outside_box_rejected(zy2_scaled):
    with pytest.raises(ValueError):
        qd.construct(zy2_scaled, [9.0], "S", seed=0)
