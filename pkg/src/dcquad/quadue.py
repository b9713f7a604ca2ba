"""Quadratic underestimator construction for d.c. functions on boxes.

An underestimator anchored at a point of construction x0 has the form

    q(x) = f(x0) + grad f(x0) (x - x0)
           + 1/2 (x - x0)' Q A L Q' (x - x0) - gamma

where Q L Q' is the eigendecomposition of the Hessian at x0, A is a scaling
matrix and gamma >= 0 a downward shift.  The method hierarchy differs in
which entries of A are free and whether gamma is used:

    S    scalar alpha (A = alpha I), closed-form decrement updates
    SS   scalar, switching to a shifted tangent once S would need alpha < 0
    UDS  uniform diagonal + shift, parameters from an LP
    D    diagonal, parameters from an LP
    DS   diagonal + shift
    M    full matrix (diagonal dominance keeps A L PSD)
    MS   full matrix + shift

Construction runs a cutting-plane loop on the partial epigraph reformulation
min t - [g(x) + q(x)] over h(x) <= t, x in B: the polytope of vpoly outer-
approximates the epigraph of h, the concave objective is scanned at its
vertices, violated vertices trigger parameter updates, and a tangent cut of
h refines the polytope at the minimizing vertex.  On convergence the vertex
minimum certifies q <= f + eps over the whole box.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dcexpr import DcFunction
from .errors import (
    DegenerateCurvature,
    IterationLimit,
    NotLocallyConvex,
    NumericalFailure,
    ShiftRequired,
)
from .linops import EigDecomp, LpInstance, solve_lp, sym_eig
from .tightness import latin_hypercube
from .vpoly import Halfspace, init_epigraph

METHODS = ("S", "SS", "UDS", "D", "DS", "M", "MS")
LP_METHODS = frozenset({"UDS", "D", "DS", "M", "MS"})
SHIFTED_METHODS = frozenset({"SS", "UDS", "DS", "MS"})
DIAGONAL_METHODS = frozenset({"S", "SS", "UDS", "D", "DS"})

PSD_TOL = 1e-9
_DEN_TOL = 1e-14


@dataclass
class QuadUnderestimator:
    """Converged parameters of one construction; evaluation is pure."""

    x0: np.ndarray
    f0: float
    grad0: np.ndarray
    eig: EigDecomp
    a: np.ndarray
    gamma: float
    method: str
    converged: bool

    @property
    def n(self) -> int:
        return self.x0.size

    @property
    def curvature_matrix(self) -> np.ndarray:
        """Q (A L) Q' — the quadratic-term matrix; PSD for valid parameters."""
        al = self.a * self.eig.eigenvalues[None, :]
        m = self.eig.q @ al @ self.eig.q.T
        return 0.5 * (m + m.T)

    def evaluate(self, x) -> float:
        d = np.asarray(x, dtype=float) - self.x0
        return float(self.f0 + self.grad0 @ d
                     + 0.5 * d @ self.curvature_matrix @ d - self.gamma)

    def evaluate_many(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - self.x0
        quad = 0.5 * np.einsum("vi,ij,vj->v", d, self.curvature_matrix, d)
        return self.f0 + d @ self.grad0 + quad - self.gamma

    def linear_many(self, pts: np.ndarray) -> np.ndarray:
        """First-order Taylor part (no shift): the baseline underestimator."""
        d = np.asarray(pts, dtype=float) - self.x0
        return self.f0 + d @ self.grad0

    def to_record(self) -> dict:
        return {
            "x0": self.x0.tolist(),
            "f0": self.f0,
            "gradient": self.grad0.tolist(),
            "curvature": self.curvature_matrix.tolist(),
            "gamma": self.gamma,
            "method": self.method,
            "converged": self.converged,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "QuadUnderestimator":
        m = np.asarray(rec["curvature"], dtype=float)
        dec = sym_eig(m)
        return cls(
            x0=np.asarray(rec["x0"], dtype=float),
            f0=float(rec["f0"]),
            grad0=np.asarray(rec["gradient"], dtype=float),
            eig=dec,
            a=np.eye(m.shape[0]),
            gamma=float(rec["gamma"]),
            method=rec["method"],
            converged=bool(rec["converged"]),
        )


def q_eval(u: QuadUnderestimator, x) -> float:
    return u.evaluate(x)


@dataclass
class ConstructionReport:
    iterations: int = 0
    vertices_enumerated: int = 0
    lp_solves: int = 0
    time_ms: float = 0.0
    final_bound: float = float("nan")
    trace: list = field(default_factory=list)
    failure: str | None = None
    seed: int = 0
    sample_count: int = 0


def check_local_convexity(f: DcFunction, x0, tol: float = PSD_TOL):
    """(is locally convex, eigendecomposition of the Hessian at x0)."""
    dec = sym_eig(f.hessian(x0))
    ok = bool(dec.eigenvalues.size == 0 or dec.eigenvalues[-1] >= -tol)
    return ok, dec


def update_scalar(f: DcFunction, x0, xstar, alpha: float) -> float:
    """Closed-form scalar decrement: the alpha making q(x*) = f(x*)."""
    x0 = np.asarray(x0, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    d = xstar - x0
    f0, g0, h0 = f.value_grad_hessian(x0)
    den = float(d @ h0 @ d)
    if abs(den) < _DEN_TOL:
        raise DegenerateCurvature(f"curvature along x*-x0 is {den:.2e}")
    num = 2.0 * (f.value(xstar) - f0 - float(g0 @ d))
    return num / den


def update_shift_scalar(f: DcFunction, x0, xstar, gamma: float) -> float:
    """Shift update: gamma making the shifted tangent touch f at x*."""
    x0 = np.asarray(x0, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    f0, g0, _ = f.value_grad_hessian(x0)
    ell = f0 + float(g0 @ (xstar - x0))
    return ell - f.value(xstar)


# ---------------------------------------------------------------------------
# LP assembly for the update methods


def _quad_coeffs_full(y: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Row of coefficients of the free A entries (row-major, full matrix) in
    q(A; v): coefficient of A_ij is 1/2 * y_i * y_j * L_jj."""
    return (0.5 * np.outer(y, y * lam)).ravel()


def _quad_coeffs_diag(y: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return 0.5 * (y * y) * lam


def build_lp(method: str, first_iteration: bool, f: DcFunction, x0, eig: EigDecomp,
             incumbent_a: np.ndarray, incumbent_gamma: float, xstar, sample,
             sample_values=None, xstar_value=None) -> LpInstance:
    """LP for one parameter update of an LP-backed method.

    Variables are the free entries of A (diagonal for UDS/D/DS; all n^2 for
    M/MS plus auxiliary S and T matrices) and gamma for shifted methods.  The
    objective maximizes the sum of q over the Latin-hypercube sample (constant
    terms dropped; shifted methods subtract |sample| * gamma).  The first LP
    of a construction additionally constrains q(v) <= f(v) at every sample
    point.
    """
    if method not in LP_METHODS:
        raise ValueError(f"method {method!r} does not use LPs")
    x0 = np.asarray(x0, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    sample = np.asarray(sample, dtype=float)
    n = x0.size
    lam = eig.eigenvalues
    q = eig.q
    shifted = method in SHIFTED_METHODS
    matrix = method in ("M", "MS")

    f0, g0, _ = f.value_grad_hessian(x0)
    if sample_values is None:
        sample_values = f.value_many(sample)
    if xstar_value is None:
        xstar_value = f.value(xstar)
    ys = (sample - x0) @ q
    ystar = (xstar - x0) @ q
    lin_s = f0 + (sample - x0) @ g0
    lin_star = f0 + float((xstar - x0) @ g0)

    if matrix:
        n_a = n * n
        off = [(i, j) for i in range(n) for j in range(n) if i != j]
        n_off = len(off)
        nv = n_a + 2 * n_off + (1 if shifted else 0)

        def a_idx(i, j):
            return i * n + j

        s_idx = {p: n_a + k for k, p in enumerate(off)}
        t_idx = {p: n_a + n_off + k for k, p in enumerate(off)}
        g_idx = nv - 1 if shifted else None
        coeffs = lambda y: _quad_coeffs_full(y, lam)  # noqa: E731
        obj = np.zeros(nv)
        obj[:n_a] = sum(coeffs(ys[k]) for k in range(ys.shape[0]))
    else:
        n_a = n
        nv = n + (1 if shifted else 0)
        g_idx = nv - 1 if shifted else None
        coeffs = lambda y: _quad_coeffs_diag(y, lam)  # noqa: E731
        obj = np.zeros(nv)
        obj[:n_a] = sum(coeffs(ys[k]) for k in range(ys.shape[0]))
    if shifted:
        obj[g_idx] = -float(sample.shape[0])

    rows, senses, rhs = [], [], []

    def add(row, sense, b):
        rows.append(row)
        senses.append(sense)
        rhs.append(b)

    def q_row(y, lin, fval):
        row = np.zeros(nv)
        row[:n_a] = coeffs(y)
        if shifted:
            row[g_idx] = -1.0
        add(row, "<=", fval - lin)

    q_row(ystar, lin_star, float(xstar_value))
    if first_iteration:
        for k in range(sample.shape[0]):
            q_row(ys[k], float(lin_s[k]), float(sample_values[k]))

    inc_diag = np.diag(incumbent_a)
    for i in range(n):
        row = np.zeros(nv)
        row[a_idx(i, i) if matrix else i] = 1.0
        add(row, "<=", float(inc_diag[i]))
    for i in range(n):
        row = np.zeros(nv)
        row[a_idx(i, i) if matrix else i] = 1.0
        add(row, ">=", 0.0)

    if method == "UDS":
        for j in range(1, n):
            row = np.zeros(nv)
            row[0] = 1.0
            row[j] = -1.0
            add(row, "==", 0.0)

    if matrix:
        # symmetry of A L, stated for every ordered pair
        for i, j in off:
            row = np.zeros(nv)
            row[a_idx(i, j)] = lam[j]
            row[a_idx(j, i)] = -lam[i]
            add(row, "==", 0.0)
        # diagonal dominance of A L via S
        for i in range(n):
            row = np.zeros(nv)
            row[a_idx(i, i)] = lam[i]
            for j in range(n):
                if j != i:
                    row[s_idx[(i, j)]] = -1.0
            add(row, ">=", 0.0)
        for i, j in off:
            row = np.zeros(nv)
            row[a_idx(i, j)] = lam[j]
            row[s_idx[(i, j)]] = -1.0
            add(row, "<=", 0.0)
            row = np.zeros(nv)
            row[a_idx(i, j)] = lam[j]
            row[s_idx[(i, j)]] = 1.0
            add(row, ">=", 0.0)
        # diagonal dominance of (A_inc - A) L via T
        for i in range(n):
            row = np.zeros(nv)
            row[a_idx(i, i)] = -lam[i]
            for j in range(n):
                if j != i:
                    row[t_idx[(i, j)]] = -1.0
            add(row, ">=", -float(incumbent_a[i, i]) * lam[i])
        for i, j in off:
            row = np.zeros(nv)
            row[a_idx(i, j)] = -lam[j]
            row[t_idx[(i, j)]] = -1.0
            add(row, "<=", -float(incumbent_a[i, j]) * lam[j])
            row = np.zeros(nv)
            row[a_idx(i, j)] = -lam[j]
            row[t_idx[(i, j)]] = 1.0
            add(row, ">=", -float(incumbent_a[i, j]) * lam[j])

    if shifted:
        row = np.zeros(nv)
        row[g_idx] = 1.0
        add(row, ">=", float(incumbent_gamma))

    lower = np.full(nv, -np.inf)
    upper = np.full(nv, np.inf)
    return LpInstance(obj, np.asarray(rows), senses, np.asarray(rhs), lower, upper)


def _unpack_lp_solution(method: str, n: int, x: np.ndarray, shifted: bool):
    if method in ("M", "MS"):
        a = x[: n * n].reshape(n, n).copy()
    else:
        a = np.diag(x[:n]).copy()
    gamma = float(x[-1]) if shifted else 0.0
    np.fill_diagonal(a, np.clip(np.diag(a), 0.0, 1.0))
    return a, max(gamma, 0.0)


# ---------------------------------------------------------------------------
# the construction algorithm


def construct(f: DcFunction, x0, method: str, eps: float = 1e-3, seed: int = 0,
              sample_count: int | None = None, max_iterations: int = 20000,
              force_linear: bool = False, on_update=None, on_lp=None):
    """Build a quadratic underestimator of f at x0 with one hierarchy method.

    Returns (QuadUnderestimator, ConstructionReport).  Raises
    NotLocallyConvex when the Hessian at x0 fails the PSD check,
    ShiftRequired when a method without shift cannot succeed at x0, and
    IterationLimit on stall or cap overrun.

    ``force_linear`` runs the SS machinery with the quadratic term pinned to
    zero from the start (a shifted tangent), used for baseline relaxations.
    ``on_update(a_old, gamma_old, a_new, gamma_new, xstar, kind)`` and
    ``on_lp(lp)`` are optional instrumentation hooks; kind is one of "scalar",
    "shift", "reset", "lp".  Updates of kind "scalar" and "shift" satisfy
    q(x*) = f(x*) exactly; the "reset" entering shift mode does not.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if force_linear and method != "SS":
        raise ValueError("force_linear applies to method SS only")
    t_start = time.perf_counter()
    x0 = np.asarray(x0, dtype=float)
    box = f.box
    n = f.n
    if not box.contains(x0):
        raise ValueError("x0 must lie inside the box domain")

    f0, grad0, hess0 = f.value_grad_hessian(x0)
    eig = sym_eig(hess0)
    if eig.eigenvalues.size and eig.eigenvalues[-1] < -PSD_TOL:
        raise NotLocallyConvex(
            f"min Hessian eigenvalue {eig.eigenvalues[-1]:.3e} at x0")
    lam = np.clip(eig.eigenvalues, 0.0, None)
    eig = EigDecomp(eig.q, lam)
    qmat = eig.q

    a = np.eye(n)
    gamma = 0.0
    shift_mode = False
    if force_linear:
        a = np.zeros((n, n))
        shift_mode = True

    count = sample_count if sample_count is not None else 100 * n
    plan = latin_hypercube(box, count, seed)
    sample = plan.points
    fvals_s = f.value_many(sample)
    lin_s = f0 + (sample - x0) @ grad0
    ys = (sample - x0) @ qmat

    report = ConstructionReport(seed=seed, sample_count=count)

    def quad_term(y_rows, a_mat):
        m_y = a_mat * lam[None, :]
        return 0.5 * ((y_rows @ m_y) * y_rows).sum(axis=1)

    first_lp_pending = method in LP_METHODS

    def run_lp(xstar, xstar_val):
        nonlocal a, gamma, first_lp_pending
        lp = build_lp(method, first_lp_pending, f, x0, eig, a, gamma, xstar,
                      sample, sample_values=fvals_s, xstar_value=xstar_val)
        if on_lp is not None:
            on_lp(lp)
        sol = solve_lp(lp)
        report.lp_solves += 1
        if sol.status != "optimal":
            if method in ("D", "M"):
                raise ShiftRequired(
                    f"update LP {sol.status}: no unshifted quadratic exists at x0")
            raise NumericalFailure(f"update LP unexpectedly {sol.status}")
        a_old, g_old = a, gamma
        a, gamma = _unpack_lp_solution(method, n, sol.x, method in SHIFTED_METHODS)
        first_lp_pending = False
        if on_update is not None:
            on_update(a_old, g_old, a.copy(), gamma,
                      np.asarray(xstar, float), "lp")

    # first LP against the most violating sample point, if any
    if method in LP_METHODS:
        qs = lin_s + quad_term(ys, a) - gamma
        gap = fvals_s - qs
        k = int(np.argmin(gap))
        if gap[k] < -eps:
            run_lp(sample[k], float(fvals_s[k]))

    # epigraph polytope of h over the box
    corners = box.corners()
    hc = f.h.value_many(corners)
    hval_mid, hgrad_mid, _ = f.h._fwd(box.midpoint, n)
    tangent_c = hval_mid + (corners - box.midpoint) @ hgrad_mid
    t_hi_raw = float(np.max(hc))
    t_lo_raw = float(np.min(tangent_c))
    span = max(t_hi_raw - t_lo_raw, 1e-6 * (1.0 + abs(t_hi_raw)))
    margin = 0.1

    def fresh_polytope(margin_factor):
        return init_epigraph(box, t_lo_raw - margin_factor * span,
                             t_hi_raw + margin_factor * span)

    poly = fresh_polytope(margin)
    cuts: list[Halfspace] = []

    def vertex_caches(verts):
        x_part = verts[:, :n]
        hv = f.h.value_many(x_part)
        gv = f.g.value_many(x_part)
        y = (x_part - x0) @ qmat
        lin = f0 + (x_part - x0) @ grad0
        return {
            "x": x_part,
            "tg": verts[:, n] - gv,
            "f": hv - gv,
            "lin": lin,
            "y": y,
            "qv": lin + quad_term(y, a) - gamma,
        }

    def refresh_qv():
        cache["qv"] = cache["lin"] + quad_term(cache["y"], a) - gamma

    cache = vertex_caches(poly.vertices())
    hplus_idx = np.arange(poly.vertex_count())

    def apply_cut(hs):
        nonlocal cache, hplus_idx
        cuts.append(hs)
        new_coords = poly.add_cut(hs)
        keep = poly.last_keep_mask
        for key in cache:
            cache[key] = cache[key][keep]
        if new_coords.shape[0]:
            newc = vertex_caches(new_coords)
            for key in cache:
                cache[key] = np.concatenate([cache[key], newc[key]])
        n_keep = int(keep.sum())
        hplus_idx = np.arange(n_keep, n_keep + new_coords.shape[0])
        return bool(keep.all()) and new_coords.shape[0] == 0

    def rebuild(margin_factor):
        nonlocal poly, cache, hplus_idx
        poly = fresh_polytope(margin_factor)
        cache = vertex_caches(poly.vertices())
        for hs in cuts:
            new_coords = poly.add_cut(hs)
            keep = poly.last_keep_mask
            for key in cache:
                cache[key] = cache[key][keep]
            if new_coords.shape[0]:
                newc = vertex_caches(new_coords)
                for key in cache:
                    cache[key] = np.concatenate([cache[key], newc[key]])
        hplus_idx = np.arange(poly.vertex_count())

    def scalar_batch_update(viol_idx):
        """Method S/SS corrective action for a batch of violating vertices."""
        nonlocal a, gamma, shift_mode
        if shift_mode:
            gaps = cache["lin"][viol_idx] - cache["f"][viol_idx]
            g_new = float(np.max(gaps))
            if g_new > gamma:
                a_old, g_old = a, gamma
                gamma = g_new
                if on_update is not None:
                    k = viol_idx[int(np.argmax(gaps))]
                    on_update(a_old, g_old, a.copy(), gamma,
                              cache["x"][k].copy(), "shift")
            return
        y = cache["y"][viol_idx]
        den = (y * y) @ lam
        num = 2.0 * (cache["f"][viol_idx] - cache["lin"][viol_idx])
        ratios = np.where(den >= _DEN_TOL, num / np.maximum(den, _DEN_TOL), -np.inf)
        alpha_new = min(float(a[0, 0]) if n else 1.0, float(np.min(ratios)))
        if alpha_new < 0.0:
            if method == "S":
                raise ShiftRequired(
                    "scalar update computed alpha < 0; use a shifted method")
            # SS: reset alpha to zero and start maintaining the shift
            a_old, g_old = a, gamma
            a = np.zeros((n, n))
            shift_mode = True
            qv = cache["lin"] - gamma
            viol2 = np.flatnonzero(cache["f"] - qv < -eps)
            if viol2.size:
                gaps = cache["lin"][viol2] - cache["f"][viol2]
                gamma = max(gamma, float(np.max(gaps)))
            if on_update is not None:
                on_update(a_old, g_old, a.copy(), gamma,
                          cache["x"][viol_idx[0]].copy(), "reset")
        else:
            a_old, g_old = a, gamma
            a = alpha_new * np.eye(n)
            if on_update is not None:
                k = viol_idx[int(np.argmin(ratios))]
                on_update(a_old, g_old, a.copy(), gamma,
                          cache["x"][k].copy(), "scalar")

    def lp_batch_update(viol_idx):
        guard = viol_idx.size + 2
        for _ in range(guard):
            qv = cache["lin"][viol_idx] + quad_term(cache["y"][viol_idx], a) - gamma
            gaps = cache["f"][viol_idx] - qv
            k = int(np.argmin(gaps))
            if gaps[k] >= -eps:
                return
            run_lp(cache["x"][viol_idx[k]], float(cache["f"][viol_idx[k]]))
        raise NumericalFailure("LP batch failed to clear H+ violations")

    converged = False
    stall = 0
    prev_bound = -np.inf
    it = 0
    while it < max_iterations:
        qv = cache["qv"]
        phi = cache["tg"] - qv
        v_star = int(np.argmin(phi))
        bound = float(phi[v_star])
        report.trace.append(bound)
        if bound >= -eps:
            converged = True
            break
        if poly.is_active(v_star, poly.cap_index):
            # optimal vertex rests on the artificial t-cap: raise it and recut
            margin *= 2.0
            rebuild(margin)
            it += 1
            continue
        stall = stall + 1 if bound <= prev_bound + 1e-15 else 0
        prev_bound = max(prev_bound, bound)
        if stall >= 500:
            report.iterations = it
            report.vertices_enumerated = poly.total_enumerated
            report.failure = "stalled"
            exc = IterationLimit("cutting-plane loop stalled without progress")
            exc.report = report
            raise exc

        updated = False
        if hplus_idx.size:
            qv_h = qv[hplus_idx]
            viol = hplus_idx[cache["f"][hplus_idx] - qv_h < -eps]
            if viol.size:
                lp_before = report.lp_solves
                a_before, g_before = a, gamma
                if method in LP_METHODS:
                    lp_batch_update(viol)
                    updated = report.lp_solves > lp_before
                else:
                    scalar_batch_update(viol)
                    updated = a_before is not a or g_before != gamma
                if updated:
                    refresh_qv()

        xc = cache["x"][v_star]
        hval, hgrad, _ = f.h._fwd(xc, n)
        normal = np.append(hgrad, -1.0)
        offset = float(hgrad @ xc - hval)
        noop_cut = apply_cut(Halfspace(normal, offset))
        it += 1
        if noop_cut and not updated:
            # The minimizing vertex lies inside the on-plane band of its own
            # tangent cut and no parameter update applies: the polytope has
            # reached its resolution limit.  The recorded bound then sits
            # within the band width of -eps and certifies q <= f - bound.
            converged = True
            break

    report.iterations = it
    report.vertices_enumerated = poly.total_enumerated
    report.time_ms = (time.perf_counter() - t_start) * 1e3
    if not converged:
        report.failure = "iteration limit"
        exc = IterationLimit(
            f"construction did not converge in {max_iterations} iterations")
        exc.report = report
        raise exc
    report.final_bound = report.trace[-1]

    u = QuadUnderestimator(x0=x0, f0=float(f0), grad0=np.asarray(grad0, float),
                           eig=eig, a=a, gamma=float(gamma), method=method,
                           converged=True)
    return u, report
