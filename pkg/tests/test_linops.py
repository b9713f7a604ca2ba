import numpy as np
import pytest

from dcquad import linops as lo
from dcquad.errors import IterationLimit, NotSymmetric
from helpers import lp_enumeration_optimum


def test_eig_diagonal_input():
    d = lo.sym_eig(np.diag([3.0, 1.0]))
    assert np.allclose(d.eigenvalues, [3.0, 1.0])
    assert np.allclose(np.abs(d.q), np.eye(2))


def test_eig_characteristic_polynomial_oracle():
    # [[2,1],[1,2]]: det(H - t I) = t^2 - 4t + 3 -> roots {3, 1}
    d = lo.sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(d.eigenvalues, [3.0, 1.0], atol=1e-12)


def test_eig_zero_matrix():
    d = lo.sym_eig(np.zeros((3, 3)))
    assert np.allclose(d.eigenvalues, 0.0)
    assert np.allclose(d.q, np.eye(3))


def test_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        lo.sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eig_random_sweep_invariants():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        h = rng.normal(size=(n, n))
        h = 0.5 * (h + h.T) * 10.0 ** float(rng.integers(-2, 3))
        d = lo.sym_eig(h)
        assert np.max(np.abs(d.q.T @ d.q - np.eye(n))) <= 1e-10
        err = np.max(np.abs(d.reconstruct() - h))
        assert err <= 1e-8 * (1.0 + np.max(np.abs(h)))
        assert np.all(np.diff(d.eigenvalues) <= 1e-12)


def test_psd_check_examples():
    assert lo.psd_check(np.diag([0.0, 5.0]), 1e-9)
    assert not lo.psd_check(np.array([[-6.375]]), 1e-9)
    assert lo.psd_check(np.diag([-1e-12, 1.0]), 1e-9)


def test_lp_simple_box():
    lp = lo.LpInstance([1.0, 1.0], [[1.0, 1.0]], ["<="], [1.0],
                       [0.0, 0.0], [1.0, 1.0])
    sol = lo.solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_lp_infeasible():
    lp = lo.LpInstance([0.0], [[1.0], [1.0]], ["<=", ">="], [-1.0, 0.0],
                       [-np.inf], [np.inf])
    assert lo.solve_lp(lp).status == "infeasible"


def test_lp_unbounded():
    lp = lo.LpInstance([1.0], np.zeros((0, 1)), [], [], [0.0], [np.inf])
    assert lo.solve_lp(lp).status == "unbounded"


def test_lp_equality_via_opposing_inequalities():
    lp = lo.LpInstance([1.0, 2.0], [[1.0, 1.0]], ["=="], [1.0],
                       [0.0, 0.0], [np.inf, np.inf])
    sol = lo.solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0, abs=1e-9)
    assert np.allclose(sol.x, [0.0, 1.0], atol=1e-9)


def test_lp_free_variables():
    # max -(x + y) over x + y >= 1, x - y = 0 with free x, y -> -1 at (.5, .5)
    lp = lo.LpInstance([-1.0, -1.0], [[1.0, 1.0], [1.0, -1.0]], [">=", "=="],
                       [1.0, 0.0], [-np.inf, -np.inf], [np.inf, np.inf])
    sol = lo.solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-1.0, abs=1e-9)
    assert np.allclose(sol.x, [0.5, 0.5], atol=1e-9)


def test_lp_oracle_sweep_small():
    rng = np.random.default_rng(42)
    for _ in range(120):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 9))
        a = rng.normal(size=(m, n))
        x_int = rng.uniform(0.2, 0.8, size=n)
        b = a @ x_int + rng.uniform(0.05, 1.0, size=m)
        lp = lo.LpInstance(rng.normal(size=n), a, ["<="] * m, b,
                           np.zeros(n), np.ones(n))
        sol = lo.solve_lp(lp)
        assert sol.status == "optimal"
        want = lp_enumeration_optimum(lp)
        assert sol.objective == pytest.approx(want, abs=1e-7)
        # LpSolution invariants: feasibility and objective recomputation
        assert np.all(lp.rows @ sol.x <= lp.rhs + 1e-8)
        assert abs(float(lp.objective @ sol.x) - sol.objective) <= 1e-8


def test_lp_pivot_cap():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(6, 4))
    b = a @ np.full(4, 0.5) + 0.3
    lp = lo.LpInstance(rng.normal(size=4), a, ["<="] * 6, b,
                       np.zeros(4), np.ones(4))
    with pytest.raises(IterationLimit):
        lo.solve_lp(lp, pivot_cap=0)


def test_lp_rejects_nan():
    with pytest.raises(ValueError):
        lo.LpInstance([np.nan], np.zeros((0, 1)), [], [], [0.0], [1.0])


def test_lp_text_dump():
    lp = lo.LpInstance([1.0, 1.0], [[1.0, 1.0]], ["<="], [1.0],
                       [0.0, 0.0], [1.0, 1.0])
    text = lo.lp_to_text(lp)
    assert "max" in text and "<=" in text and "bnds" in text
