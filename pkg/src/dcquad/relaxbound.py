"""Convex QCQP root-node relaxations of d.c. problems and their bounds.

For every nonlinear function in a problem (the objective and each convex or
d.c. constraint body), the relaxation carries ``per_dim * n`` convex
quadratic underestimators anchored at locally convex Latin-hypercube points.
Each underestimator is lowered by its certified construction slack
(max(0, -final bound)), which turns the eps-tolerant certificate
q <= f + eps into a rigorous q - margin <= f, so the relaxation bound can
never exceed the true optimum.

The convex QCQP  min t  s.t.  t >= q_j(x), q_c(x) <= rhs_c, linear rows,
x in B  is solved with Kelley's cutting-plane loop over the dense simplex:
violated quadratics are replaced by their tangents at the current LP
optimum until the worst violation falls below tolerance.  Every LP value is
a valid lower bound of the relaxation (so of the problem), and the bound is
nondecreasing across iterations.

A reference optimum (dense search plus feasible pattern-search polish, an
upper bound on the true optimum) and a baseline relaxation built from
shifted tangents (zero-curvature underestimators at the same points of
construction) turn the bounds into gap-reduction figures.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .benchgen import ProblemInstance
from .dcexpr import DcFunction
from .errors import (
    InfeasibleInstance,
    InvalidConfig,
    IterationLimit,
    NoValidPoint,
    NumericalFailure,
)
from .linops import LpInstance, solve_lp
from .quadue import QuadUnderestimator, check_local_convexity, construct
from .tightness import latin_hypercube


@dataclass
class UnderEntry:
    """An underestimator plus its certified validity margin."""

    u: QuadUnderestimator
    margin: float

    def values(self, pts: np.ndarray) -> np.ndarray:
        return self.u.evaluate_many(pts) - self.margin

    def value_grad(self, x: np.ndarray):
        d = np.asarray(x, float) - self.u.x0
        m = self.u.curvature_matrix
        val = self.u.f0 + self.u.grad0 @ d + 0.5 * d @ m @ d - self.u.gamma
        return float(val) - self.margin, self.u.grad0 + m @ d


@dataclass
class QcqpRelaxation:
    problem: ProblemInstance
    objective_ues: list
    constraint_ues: list            # (UnderEntry, rhs)
    per_dim: int
    method: str
    seed: int
    construction_stats: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.problem.n


@dataclass
class KelleyResult:
    bound: float
    cuts: int
    iterations: int
    status: str
    trace: list = field(default_factory=list)


@dataclass
class BoundResult:
    problem: str
    n: int
    lower_bound: float
    solver_iterations: int
    status: str
    reference_optimum: float
    baseline_bound: float
    gap_reduction: float
    constructions: int = 0
    total_cuts: int = 0
    time_ms: float = 0.0


def _accept_points(fn: DcFunction, count: int, seed: int, budget: int):
    """Locally convex Latin-hypercube points of construction."""
    accepted = []
    drawn = 0
    batch = 0
    while len(accepted) < count and drawn < budget:
        plan = latin_hypercube(fn.box, count, seed + 7919 * batch)
        for p in plan.points:
            drawn += 1
            ok, _ = check_local_convexity(fn, p)
            if ok:
                accepted.append(p.copy())
                if len(accepted) >= count:
                    break
            if drawn >= budget:
                break
        batch += 1
    if not accepted:
        raise NoValidPoint(
            f"no locally convex point for {fn.name!r} within {budget} draws")
    k = 0
    while len(accepted) < count:      # rare: recycle accepted points
        accepted.append(accepted[k].copy())
        k += 1
    return accepted[:count]


def _nonlinear_parts(p: ProblemInstance):
    parts = [("objective", p.objective, None)]
    for c in p.constraints:
        if c.kind != "linear":
            parts.append((c.kind, c.fn, c.rhs))
    return parts


def build_relaxation(p: ProblemInstance, per_dim: int = 4, method: str = "DS",
                     seed: int = 0, eps: float = 1e-3) -> QcqpRelaxation:
    """Underestimate every nonlinear function of the problem at per_dim * n
    locally convex points; method DS by default."""
    if per_dim < 1:
        raise InvalidConfig("per_dim must be >= 1")
    n = p.n
    target = per_dim * n
    budget = 100 * per_dim * n
    objective_ues: list[UnderEntry] = []
    constraint_ues: list[tuple[UnderEntry, float]] = []
    stats = {"constructions": 0, "iterations": 0, "lp_solves": 0}
    force_linear = method == "SS-linear"
    real_method = "SS" if force_linear else method

    for fidx, (kind, fn, rhs) in enumerate(_nonlinear_parts(p)):
        pts = _accept_points(fn, target, seed + 104729 * fidx, budget)
        for pidx, x0 in enumerate(pts):
            u, rep = construct(fn, x0, real_method, eps=eps,
                               seed=seed + 31 * fidx + pidx,
                               force_linear=force_linear)
            margin = max(0.0, -rep.final_bound)
            entry = UnderEntry(u, margin)
            stats["constructions"] += 1
            stats["iterations"] += rep.iterations
            stats["lp_solves"] += rep.lp_solves
            if kind == "objective":
                objective_ues.append(entry)
            else:
                constraint_ues.append((entry, float(rhs)))
    return QcqpRelaxation(p, objective_ues, constraint_ues, per_dim, method,
                          seed, stats)


def solve_qcqp(r: QcqpRelaxation, tol: float = 1e-6,
               max_cuts: int = 5000) -> KelleyResult:
    """Kelley cutting-plane bound for the convex QCQP relaxation."""
    p = r.problem
    n = p.n
    nv = n + 1                       # x plus the epigraph scalar t
    lower = np.append(p.box.lower, -np.inf)
    upper = np.append(p.box.upper, np.inf)
    obj = np.zeros(nv)
    obj[n] = -1.0                    # maximize -t == minimize t

    rows, senses, rhs = [], [], []
    for c in p.constraints:
        if c.kind == "linear":
            grad = c.fn.grad(p.box.midpoint)
            rows.append(np.append(grad, 0.0))
            senses.append("<=")
            rhs.append(c.rhs)

    def add_obj_cut(entry: UnderEntry, x: np.ndarray):
        val, grad = entry.value_grad(x)
        row = np.append(grad, -1.0)
        rows.append(row)
        senses.append("<=")
        rhs.append(float(grad @ x - val))

    def add_con_cut(entry: UnderEntry, bound: float, x: np.ndarray):
        val, grad = entry.value_grad(x)
        rows.append(np.append(grad, 0.0))
        senses.append("<=")
        rhs.append(float(bound - val + grad @ x))

    mid = p.box.midpoint
    for e in r.objective_ues:
        add_obj_cut(e, mid)
    for e, b in r.constraint_ues:
        add_con_cut(e, b, mid)

    trace = []
    iterations = 0
    while True:
        lp = LpInstance(obj, np.asarray(rows), list(senses), np.asarray(rhs),
                        lower, upper)
        sol = solve_lp(lp)
        if sol.status != "optimal":
            raise NumericalFailure(f"relaxation master LP {sol.status}")
        iterations += 1
        x_hat = sol.x[:n]
        t_hat = float(sol.x[n])
        trace.append(t_hat)
        worst = 0.0
        added = 0
        for e in r.objective_ues:
            val, _ = e.value_grad(x_hat)
            v = val - t_hat
            worst = max(worst, v)
            if v > tol:
                add_obj_cut(e, x_hat)
                added += 1
        for e, b in r.constraint_ues:
            val, _ = e.value_grad(x_hat)
            v = val - b
            worst = max(worst, v)
            if v > tol:
                add_con_cut(e, b, x_hat)
                added += 1
        if worst <= tol or added == 0:
            return KelleyResult(t_hat, len(rows), iterations, "optimal", trace)
        if len(rows) > max_cuts:
            raise IterationLimit(f"Kelley exceeded {max_cuts} cuts")


def reference_optimum(p: ProblemInstance, seed: int = 0) -> float:
    """Best feasible objective value found by dense search plus feasible
    pattern-search polish; an upper bound on the true optimum."""
    n = p.n
    if n <= 2:
        pts = p.box.grid(512)
    else:
        eng = qmc.Sobol(d=n, scramble=True, seed=seed)
        pts = p.box.lower + eng.random(2 ** 18) * p.box.width
    feas = p.feasible_mask(pts, tol=0.0)
    if not feas.any():
        plan = latin_hypercube(p.box, 100 * n, seed)
        extra = plan.points[p.feasible_mask(plan.points, tol=0.0)]
        if extra.shape[0] == 0:
            raise InfeasibleInstance(f"no feasible point found for {p.name}")
        cand = extra
        vals = p.objective.value_many(cand)
    else:
        cand = pts[feas]
        vals = p.objective.value_many(cand)
    order = np.argsort(vals, kind="stable")[:32]
    starts = cand[order]
    best = float(vals[order[0]])

    step0 = p.box.width / 64.0
    for x in starts:
        x = x.copy()
        step = step0.copy()
        val = float(p.objective.value_many(x[None, :])[0])
        for _ in range(20):
            trial = np.repeat(x[None, :], 2 * n, axis=0)
            for i in range(n):
                trial[2 * i, i] += step[i]
                trial[2 * i + 1, i] -= step[i]
            np.clip(trial, p.box.lower, p.box.upper, out=trial)
            ok = p.feasible_mask(trial, tol=0.0)
            if ok.any():
                tv = p.objective.value_many(trial[ok])
                k = int(np.argmin(tv))
                if tv[k] < val:
                    val = float(tv[k])
                    x = trial[ok][k]
                    continue
            step *= 0.5
        best = min(best, val)
    return best


def baseline_linear_bound(p: ProblemInstance, per_dim: int = 4, seed: int = 0,
                          tol: float = 1e-6, eps: float = 1e-3) -> float:
    """Bound from shifted-tangent (zero curvature) underestimators built at
    the same points of construction as the quadratic relaxation."""
    r = build_relaxation(p, per_dim=per_dim, method="SS-linear", seed=seed,
                         eps=eps)
    return solve_qcqp(r, tol=tol).bound


def study_problem(p: ProblemInstance, per_dim: int = 4, method: str = "DS",
                  seed: int = 0, tol: float = 1e-6,
                  eps: float = 1e-3) -> BoundResult:
    """Full per-problem record: quadratic bound, baseline bound, reference
    optimum, and the gap reduction of quadratic over baseline."""
    t0 = time.perf_counter()
    r = build_relaxation(p, per_dim=per_dim, method=method, seed=seed, eps=eps)
    kel = solve_qcqp(r, tol=tol)
    base = baseline_linear_bound(p, per_dim=per_dim, seed=seed, tol=tol, eps=eps)
    ref = reference_optimum(p, seed=seed)
    denom = ref - base
    gap = (kel.bound - base) / denom if denom > 1e-12 else 0.0
    return BoundResult(
        problem=p.name,
        n=p.n,
        lower_bound=kel.bound,
        solver_iterations=kel.iterations,
        status=kel.status,
        reference_optimum=ref,
        baseline_bound=base,
        gap_reduction=gap,
        constructions=r.construction_stats["constructions"],
        total_cuts=kel.cuts,
        time_ms=(time.perf_counter() - t0) * 1e3,
    )
