"""Benchmark d.c. functions and systematic d.c. problem generation.

Three function sets ship as package data:

* ``coconut_functions()`` — ten d.c. functions extracted from COCONUT-
  catalogued optimization problems (3 univariate, 7 bivariate), range-scaled
  so f(B) lies within [-1, 1].
* ``core_dc(i)`` — six univariate non-convex d.c. building blocks on [-1, 1];
  multi-dimensional compositions add the linking term
  (1/(2p)) (x_1 + ... + x_p)^4 which couples the coordinates.
* ``bundled_problems()`` — twenty-four d.c. optimization problems (six per
  dimension, n = 1..4) used by the root-node bound study, reproduced to the
  3-decimal precision of their published statement.

``generate_problem`` creates fresh instances parameterized by
(n, m_l, m_c, m_dc): a d.c. objective, one linear constraint (n > 1), convex
constraints drawn from a catalog of convex functional forms, and d.c.
constraints from shuffled core-function compositions.  Each right-hand side
is set by binary search so the constraint eliminates 20% of the surviving
Latin-hypercube sample, added linear -> convex -> d.c. so the d.c. rows cut
the deepest.
"""

from __future__ import annotations

import importlib.resources as resources
from dataclasses import dataclass, field

import numpy as np

from .dcexpr import (
    BoxDomain,
    Const,
    DcFunction,
    Div,
    Exp,
    Expr,
    Log,
    Pow,
    Prod,
    Sum,
    Var,
    parse_expr,
)
from .errors import CatalogExhausted, DegenerateSpread, DomainViolation, ParseError
from .linops import sym_eig
from .tightness import latin_hypercube

_FUNC_CACHE: dict = {}


def _load_function_file(fname: str) -> list:
    from .dcexpr import parse_functions_text

    text = resources.files("dcquad.data").joinpath(fname).read_text("utf-8")
    return parse_functions_text(text)


def coconut_functions(scaled: bool = True) -> list:
    """The ten benchmark d.c. functions, range-scaled by default."""
    key = ("coconut", scaled)
    if key not in _FUNC_CACHE:
        from .dcexpr import scale_range

        fns = _load_function_file("benchmark_functions.txt")
        if scaled:
            fns = [scale_range(f) for f in fns]
        _FUNC_CACHE[key] = fns
    return list(_FUNC_CACHE[key])


def coconut_function(name: str, scaled: bool = True) -> DcFunction:
    for f in coconut_functions(scaled):
        if f.name == name:
            return f
    raise KeyError(f"unknown benchmark function {name!r}")


def core_dc(i: int) -> DcFunction:
    """Core univariate d.c. function i in 1..6 on [-1, 1] (unscaled)."""
    if not 1 <= i <= 6:
        raise ValueError("core function index must be in 1..6")
    key = ("core",)
    if key not in _FUNC_CACHE:
        _FUNC_CACHE[key] = _load_function_file("core_functions.txt")
    return _FUNC_CACHE[key][i - 1]


def link_term(p: int) -> Expr:
    """(1/(2p)) * (x1 + ... + xp)^4 — couples the p coordinates."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return Prod((Const(1.0 / (2.0 * p)),
                 Pow(Sum(tuple(Var(j) for j in range(p))) if p > 1 else Var(0), 4.0)))


def _substitute_var(expr: Expr, target: int) -> Expr:
    """Reindex a univariate expression (in x1) onto variable ``target``."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Var):
        return Var(target)
    if isinstance(expr, Sum):
        return Sum(tuple(_substitute_var(c, target) for c in expr.children))
    if isinstance(expr, Prod):
        return Prod(tuple(_substitute_var(c, target) for c in expr.children))
    if isinstance(expr, Div):
        return Div(_substitute_var(expr.num, target), _substitute_var(expr.den, target))
    if isinstance(expr, Pow):
        return Pow(_substitute_var(expr.base, target), expr.exponent)
    if isinstance(expr, Exp):
        return Exp(_substitute_var(expr.child, target))
    if isinstance(expr, Log):
        return Log(_substitute_var(expr.child, target))
    raise TypeError(f"unknown node {type(expr).__name__}")


def dc_composition(indices, box: BoxDomain | None = None) -> DcFunction:
    """Sum of core functions, one per coordinate, plus the linking term
    (for two or more coordinates)."""
    indices = tuple(int(i) for i in indices)
    n = len(indices)
    if box is None:
        box = BoxDomain(-np.ones(n), np.ones(n))
    hs, gs = [], []
    for coord, idx in enumerate(indices):
        f = core_dc(idx)
        hs.append(_substitute_var(f.h, coord))
        gs.append(_substitute_var(f.g, coord))
    if n > 1:
        hs.append(link_term(n))
    h = hs[0] if len(hs) == 1 else Sum(tuple(hs))
    g = gs[0] if len(gs) == 1 else Sum(tuple(gs))
    name = "+".join(f"f{i}" for i in indices) + ("+L" if n > 1 else "")
    return DcFunction(h, g, box, name=name, check_guards=False)


# ---------------------------------------------------------------------------
# problem instances


@dataclass
class ProblemSpec:
    n: int
    m_l: int
    m_c: int
    m_dc: int
    seed: int = 0

    def validate(self):
        if self.n not in (1, 2, 3, 4):
            raise ValueError("n must be in 1..4")
        if self.m_l != (1 if self.n > 1 else 0):
            raise ValueError("m_l must be 1 for n > 1 and 0 for n = 1")
        if self.m_c not in (1, 2):
            raise ValueError("m_c must be 1 or 2")
        if self.m_dc not in (1, 2, 3):
            raise ValueError("m_dc must be in 1..3")


@dataclass
class Constraint:
    kind: str                 # "linear" | "convex" | "dc"
    fn: DcFunction
    rhs: float


@dataclass
class ProblemInstance:
    name: str
    objective: DcFunction
    constraints: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def box(self) -> BoxDomain:
        return self.objective.box

    def feasible_mask(self, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        mask = np.ones(pts.shape[0], dtype=bool)
        for c in self.constraints:
            mask &= c.fn.value_many(pts) <= c.rhs + tol
        return mask


def rhs_binary_search(fn, sample: np.ndarray, fraction: float = 0.2) -> float:
    """Right-hand side eliminating round(fraction * |sample|) sample points.

    Bisects rhs between the sample min and max of fn; returns the largest rhs
    for which the count of points with fn(x) > rhs is still >= the target
    (exact equality whenever the sample values near the threshold are
    distinct).
    """
    sample = np.asarray(sample, dtype=float)
    if sample.shape[0] < 1:
        raise ValueError("sample must be nonempty")
    values = fn.value_many(sample)
    vmin, vmax = float(np.min(values)), float(np.max(values))
    if vmax - vmin < 1e-12:
        raise DegenerateSpread("constraint expression is constant on the sample")
    target = int(round(fraction * sample.shape[0]))
    lo, hi = vmin, vmax
    if int(np.count_nonzero(values > hi)) >= target:
        return hi              # the sample max already eliminates enough
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if int(np.count_nonzero(values > mid)) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, abs(vmax), abs(vmin)):
            break
    return lo


# -- convex constraint catalog ----------------------------------------------
#
# Atoms are univariate convex or concave pieces on [-1, 1], normalized to
# [0, 1] by an affine map (which preserves curvature).  A generated convex
# function is either
#   mode A: envelope(u) with u a nonnegative combination of convex atoms and
#           the envelope convex nondecreasing on u >= 0, or
#   mode B: envelope(v) with v positive concave (constant plus concave atoms
#           minus convex atoms) and the envelope convex nonincreasing.
# Every draw is verified numerically (Hessian PSD on the generation sample)
# and redrawn on failure.

_GRID_1D = np.linspace(-1.0, 1.0, 4097)[:, None]


def _normalized(expr: Expr) -> Expr:
    vals = expr.value_many(_GRID_1D)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi - lo < 1e-9:
        raise DegenerateSpread("flat atom")
    return Prod((Const(1.0 / (hi - lo)), Sum((expr, Const(-lo)))))


def _affine(v: int, a: float, b: float) -> Expr:
    return Sum((Prod((Const(a), Var(v))), Const(b)))


def _convex_atom(rng) -> Expr:
    k = int(rng.integers(0, 6))
    if k == 0:
        return Pow(Var(0), float(2 * int(rng.integers(1, 4))))
    if k == 1:
        return Pow(_affine(0, 0.909, 1.0), 3.0)
    if k == 2:
        return Exp(Prod((Const(float(rng.choice([-1.0, 1.0]))), Var(0))))
    if k == 3:
        return Div(Const(1.0), _affine(0, 1.0, 1.1))
    if k == 4:
        return Pow(_affine(0, 0.909, 1.0), -0.667)
    return Prod((_affine(0, 1.478, 1.626), Log(_affine(0, 1.0, 1.1))))


def _concave_atom(rng) -> Expr:
    k = int(rng.integers(0, 4))
    if k == 0:
        return Pow(_affine(0, 0.909, 1.0), 0.1)
    if k == 1:
        return Pow(_affine(0, 0.909, 1.0), 0.75)
    if k == 2:
        return Log(_affine(0, 1.0, 1.1))
    return Prod((_affine(0, -1.478, -1.626), Log(_affine(0, 1.0, 1.1))))


def _random_convex_expr(rng, n: int) -> Expr:
    mode_a = bool(rng.random() < 0.5)
    weights = rng.uniform(0.2, 1.0, size=n)
    weights *= rng.uniform(0.5, 0.9) / weights.sum()
    if mode_a:
        parts = [Prod((Const(float(w)),
                       _substitute_var(_normalized(_convex_atom(rng)), v)))
                 for v, w in enumerate(weights)]
        u = parts[0] if len(parts) == 1 else Sum(tuple(parts))
        kind = int(rng.integers(0, 3))
        a = float(rng.uniform(0.3, 1.0))
        b = float(rng.uniform(0.2, 1.0))
        if kind == 0:
            raw = Pow(Sum((Prod((Const(a), u)), Const(1.0))), 3.0)
        elif kind == 1:
            raw = Prod((Pow(Sum((Prod((Const(a), u)), Const(1.0))), 3.0),
                        Exp(Prod((Const(b), u)))))
        else:
            raw = Exp(Prod((Const(float(rng.uniform(0.5, 2.0))), u)))
    else:
        parts, w_neg = [], 0.0
        for v, w in enumerate(weights):
            if rng.random() < 0.5:
                atom = _substitute_var(_normalized(_concave_atom(rng)), v)
                parts.append(Prod((Const(float(w)), atom)))
            else:
                atom = _substitute_var(_normalized(_convex_atom(rng)), v)
                parts.append(Prod((Const(-float(w)), atom)))
                w_neg += float(w)
        m0 = 0.05 + w_neg + float(rng.uniform(0.0, 0.5))
        v_expr = Sum((Const(m0), *parts))
        kind = int(rng.integers(0, 3))
        if kind == 0:
            p = float(rng.choice([0.667, 1.0, 2.333]))
            raw = Div(Const(1.0), Pow(v_expr, p)) if p != 1.0 else Div(Const(1.0), v_expr)
        elif kind == 1:
            p = float(rng.choice([0.1, 0.75]))
            raw = Prod((Const(-1.0), Pow(v_expr, p)))
        else:
            raw = Prod((Const(-1.0), Div(Log(v_expr), Log(Const(10.0)))))
    return raw


def _scale_output(expr: Expr, pts: np.ndarray, rng) -> Expr:
    vals = expr.value_many(pts)
    m = float(np.max(np.abs(vals)))
    c = float(rng.uniform(0.1, 1.0)) / max(m, 1e-6)
    return Prod((Const(round(c, 6)), expr))


def _is_convex_on(fn: DcFunction, pts: np.ndarray, tol: float = 1e-6) -> bool:
    for x in pts:
        h = fn.hessian(x)
        scale = 1.0 + float(np.max(np.abs(h)))
        if sym_eig(h).eigenvalues[-1] < -tol * scale:
            return False
    return True


def random_convex_constraint_fn(rng, n: int, sample: np.ndarray,
                                max_draws: int = 200) -> DcFunction:
    """Draw a verified convex constraint body (g = 0) over [-1, 1]^n."""
    box = BoxDomain(-np.ones(n), np.ones(n))
    for _ in range(max_draws):
        try:
            expr = _scale_output(_random_convex_expr(rng, n), sample, rng)
            fn = DcFunction(expr, Const(0.0), box, name="convex")
        except (DomainViolation, DegenerateSpread):
            continue
        if _is_convex_on(fn, sample):
            return fn
    raise CatalogExhausted("no verified convex draw within the budget")


# -- generation -------------------------------------------------------------


def generate_problem(spec: ProblemSpec) -> ProblemInstance:
    """Systematic instance generation; deterministic for a fixed spec+seed."""
    spec.validate()
    n = spec.n
    rng = np.random.default_rng(spec.seed)
    box = BoxDomain(-np.ones(n), np.ones(n))
    plan = latin_hypercube(box, 100 * n, spec.seed)
    alive = plan.points.copy()

    tuples = [tuple(t) for t in np.stack(np.meshgrid(
        *([np.arange(1, 7)] * n), indexing="ij"), axis=-1).reshape(-1, n)]
    order = rng.permutation(len(tuples))
    comp_iter = iter([tuples[k] for k in order])

    def next_comp():
        try:
            return next(comp_iter)
        except StopIteration:
            raise CatalogExhausted(
                "fewer d.c. compositions than requested constraints") from None

    objective = dc_composition(next_comp(), box)
    constraints: list[Constraint] = []

    def add_constraint(kind: str, fn: DcFunction):
        nonlocal alive
        rhs = rhs_binary_search(fn, alive)
        vals = fn.value_many(alive)
        eliminated = int(np.count_nonzero(vals > rhs))
        survivors = alive[vals <= rhs]
        if eliminated < 1 or survivors.shape[0] < 1:
            raise DegenerateSpread(
                f"{kind} constraint failed to split the sample")
        constraints.append(Constraint(kind, fn, float(rhs)))
        alive = survivors

    if spec.m_l:
        beta = rng.choice([-1.0, 1.0], size=n)
        parts = tuple(Prod((Const(float(b)), Var(j))) for j, b in enumerate(beta))
        lin = DcFunction(parts[0] if n == 1 else Sum(parts), Const(0.0), box,
                         name="linear")
        add_constraint("linear", lin)
    for _ in range(spec.m_c):
        add_constraint("convex", random_convex_constraint_fn(rng, n, plan.points))
    for _ in range(spec.m_dc):
        add_constraint("dc", dc_composition(next_comp(), box))

    name = f"gen-n{n}-l{spec.m_l}-c{spec.m_c}-dc{spec.m_dc}-seed{spec.seed}"
    return ProblemInstance(name, objective, constraints)


# ---------------------------------------------------------------------------
# problem file format
#
#   name: <name>
#   n: <n>
#   box: lo1 up1 [lo2 up2 ...]
#   objective: <h> | <g>
#   constraint: <linear|convex|dc> | <h> | <g> | <rhs>


def problem_to_text(p: ProblemInstance) -> str:
    box = " ".join(repr(float(v))
                   for pair in zip(p.box.lower, p.box.upper) for v in pair)
    lines = [f"name: {p.name}", f"n: {p.n}", f"box: {box}",
             f"objective: {p.objective.h.to_text()} | {p.objective.g.to_text()}"]
    for c in p.constraints:
        lines.append(f"constraint: {c.kind} | {c.fn.h.to_text()} | "
                     f"{c.fn.g.to_text()} | {c.rhs!r}")
    return "\n".join(lines) + "\n"


def parse_problem_text(text: str) -> ProblemInstance:
    name, n, box = None, None, None
    objective = None
    constraints = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, body = line.partition(":")
        key = key.strip()
        body = body.strip()
        if key == "name":
            name = body
        elif key == "n":
            n = int(body)
        elif key == "box":
            nums = [float(v) for v in body.split()]
            box = BoxDomain(nums[0::2], nums[1::2])
        elif key == "objective":
            h_txt, g_txt = [s.strip() for s in body.split("|")]
            objective = DcFunction(parse_expr(h_txt), parse_expr(g_txt), box,
                                   name=f"{name}-objective")
        elif key == "constraint":
            kind, h_txt, g_txt, rhs = [s.strip() for s in body.split("|")]
            if kind not in ("linear", "convex", "dc"):
                raise ParseError(f"bad constraint class {kind!r}")
            fn = DcFunction(parse_expr(h_txt), parse_expr(g_txt), box, name=kind)
            constraints.append(Constraint(kind, fn, float(rhs)))
        else:
            raise ParseError(f"unexpected line: {raw!r}")
    if name is None or objective is None:
        raise ParseError("problem record incomplete")
    return ProblemInstance(name, objective, constraints)


def write_problem_file(path, p: ProblemInstance) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(problem_to_text(p))


def read_problem_file(path) -> ProblemInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem_text(fh.read())


# ---------------------------------------------------------------------------
# the bundled problem library (24 problems, 6 per dimension)

_L = "linear"
_C = "convex"
_D = "dc"

_BUNDLED = [
    # 1D ---------------------------------------------------------------
    (1, (1,), [
        (_C, "0.053*(0.909*x1^10 + 1)^3*exp(1.0*x1^10)", 0.075),
        (_D, (2,), -0.072)]),
    (1, (6,), [
        (_C, "0.004/(1 - 0.091/(x1 + 1.1))^2.333", 0.006),
        (_D, (2,), -0.031),
        (_D, (5,), 0.466)]),
    (1, (4,), [
        (_C, "-1.103*(1 - 0.334*exp(-x1))^0.75", -0.540),
        (_D, (1,), 0.320),
        (_D, (6,), 0.381),
        (_D, (5,), 0.579)]),
    (1, (4,), [
        (_C, "0.053*(-0.909*log(1.1 - x1)/log(10) + 1)^3/(1.1 - x1)^(1.0/log(10))",
         0.152),
        (_C, "-1.0*(1 - 0.909*x1^10)^0.1", -0.998),
        (_D, (6,), 0.422)]),
    (1, (6,), [
        (_C, "0.202/(-0.048*(0.909*x1 + 1)^3*exp(x1) + 1)^0.667", 0.263),
        (_C, "-0.616*(0.852*(0.909*x1 + 1)^0.1 + 1)^0.75", -0.946),
        (_D, (2,), -0.059),
        (_D, (5,), 0.271)]),
    (1, (5,), [
        (_C, "0.1/(-0.074*exp(-x1)/(0.909*x1 + 1)^0.667 + 1.1)", 0.115),
        (_C, "0.202/(0.909*x1 + 1)^0.667", 0.247),
        (_D, (2,), -0.018),
        (_D, (4,), 0.305),
        (_D, (3,), 0.616)]),
    # 2D ---------------------------------------------------------------
    (2, (2, 5), [
        (_L, (-1, 1), 0.797),
        (_C, "1.887*exp(-0.469*(0.909*x1 + 1)^0.1 - 0.308*(0.909*x2 + 1)^0.75)"
             "/(0.426*(0.909*x1 + 1)^0.1 + 0.28*(0.909*x2 + 1)^0.75 + 1)^0.667",
         0.760),
        (_D, (4, 6), 0.730)]),
    (2, (1, 5), [
        (_L, (-1, -1), 0.688),
        (_C, "0.053*(0.034*exp(-x2)/(0.909*x2 + 1)^0.667"
             " - 0.455*log(1.1 - x1)/log(10) + 1)^3"
             "*exp(0.037*exp(-x2)/(0.909*x2 + 1)^0.667)"
             "/(1.1 - x1)^(0.5/log(10))", 0.132),
        (_D, (3, 4), 0.963),
        (_D, (2, 6), 0.219)]),
    (2, (1, 4), [
        (_L, (1, -1), 0.727),
        (_C, "0.144*(0.024*(0.909*x2 + 1)^3*exp(x2) + 1 + 0.045/(x1 + 1.1))^3",
         0.307),
        (_D, (2, 3), 0.580),
        (_D, (1, 3), 0.888),
        (_D, (2, 4), 0.052)]),
    (2, (4, 5), [
        (_L, (-1, 1), 0.741),
        (_C, "0.45*exp(-0.308*(0.909*x1 + 1)^0.75 + 0.184*exp(-x2))"
             "/(0.28*(0.909*x1 + 1)^0.75 + 1 - 0.167*exp(-x2))^0.667", 0.515),
        (_C, "0.074*exp(0.101/(0.909*x1 + 1)^0.667 + 0.072*(0.909*x2 + 1)^3)"
             "/(-0.092/(0.909*x1 + 1)^0.667 - 0.065*(0.909*x2 + 1)^3 + 1)^0.667",
         0.133),
        (_D, (2, 3), 0.559)]),
    (2, (2, 4), [
        (_L, (1, -1), 0.719),
        (_C, "0.053*(0.065*(0.909*x1 + 1)^3 + 0.167*exp(x2) + 1)^3"
             "*exp(0.072*(0.909*x1 + 1)^3 + 0.184*exp(x2))", 0.275),
        (_C, "-0.967*(0.455*(-1.478*x1 - 1.626)*log(x1 + 1.1)/log(10)"
             " - 0.167*exp(x2) + 1)^0.75", -0.718),
        (_D, (1, 2), 0.364),
        (_D, (5, 5), 2.221)]),
    (2, (4, 5), [
        (_L, (1, -1), 0.810),
        (_C, "0.144*(0.455*x1 + 0.455*x2 + 1)^3", 0.363),
        (_C, "-1.017*(-0.002/(0.909*x1 + 1)^2.333 + 1 - 0.045/(x2 + 1.1))^0.75",
         -0.942),
        (_D, (1, 2), 0.234),
        (_D, (2, 3), 0.474),
        (_D, (1, 3), 0.768)]),
    # 3D ---------------------------------------------------------------
    (3, (2, 4, 5), [
        (_L, (1, -1, 1), 0.938),
        (_C, "0.679/(-0.333*x3^4 + 0.312*(0.909*x1 + 1)^0.1"
             " - 0.048*(0.909*x2 + 1)^3 + 1.1)", 0.605),
        (_D, (4, 4, 4), 0.750)]),
    (3, (1, 2, 6), [
        (_L, (1, 1, 1), 0.891),
        (_C, "0.074*exp(0.067/(0.909*x1 + 1)^0.667 + 0.123*exp(x3))"
             "/((1.1 - x2)^(0.333/log(10))*(-0.061/(0.909*x1 + 1)^0.667"
             " - 0.111*exp(x3) + 0.303*log(1.1 - x2)/log(10) + 1)^0.667)", 0.130),
        (_D, (1, 4, 4), 1.277),
        (_D, (4, 5, 6), 2.414)]),
    (3, (1, 1, 6), [
        (_L, (1, -1, 1), 0.873),
        (_C, "0.004/(-0.044*(0.909*x1 + 1)^3 - 0.023*exp(-x3)/(0.909*x3 + 1)^0.667"
             " + 0.303*log(1.1 - x2)/log(10) + 1)^2.333", 0.008),
        (_D, (2, 3, 4), 1.158),
        (_D, (4, 4, 4), 0.604),
        (_D, (3, 4, 4), 0.887)]),
    (3, (1, 3, 4), [
        (_L, (-1, -1, 1), 0.879),
        (_C, "-0.975*(0.187*(0.909*x1 + 1)^0.75 - 0.044*(0.909*x2 + 1)^3 + 1"
             " - 0.03/(x3 + 1.1))^0.1", -0.969),
        (_C, "0.053*(0.044*(0.909*x1 + 1)^3 + 0.023*exp(-x3)/(0.909*x3 + 1)^0.667"
             " + 1 + 0.03/(x2 + 1.1))^3*exp(0.048*(0.909*x1 + 1)^3"
             " + 0.025*exp(-x3)/(0.909*x3 + 1)^0.667 + 0.033/(x2 + 1.1))", 0.158),
        (_D, (5, 5, 5), 4.602)]),
    (3, (1, 1, 3), [
        (_L, (-1, -1, -1), 0.867),
        (_C, "0.053*(0.061/(0.909*x1 + 1)^0.667 + 1 + 0.111*exp(-x2)"
             " + 0.03/(x3 + 1.1))^3*exp(0.067/(0.909*x1 + 1)^0.667"
             " + 0.123*exp(-x2) + 0.033/(x3 + 1.1))", 0.160),
        (_C, "0.867*(-0.284*(0.909*x1 + 1)^0.1 - 0.187*(0.909*x2 + 1)^0.75"
             " + 0.111*exp(x3) + 1)^3", 0.360),
        (_D, (1, 6, 6), 3.062),
        (_D, (1, 2, 5), 0.837)]),
    (3, (2, 2, 3), [
        (_L, (-1, -1, 1), 0.855),
        (_C, "0.531*exp(-0.205*(0.909*x1 + 1)^0.75 + 0.001/(0.909*x2 + 1)^2.333"
             " + 0.033/(x3 + 1.1))", 0.501),
        (_C, "0.917*exp(-0.312*(0.909*x1 + 1)^0.1 - 0.205*(0.909*x2 + 1)^0.75"
             " - 0.333*(-1.478*x3 - 1.626)*log(x3 + 1.1)/log(10))"
             "/(0.284*(0.909*x1 + 1)^0.1 + 0.187*(0.909*x2 + 1)^0.75"
             " + 0.303*(-1.478*x3 - 1.626)*log(x3 + 1.1)/log(10) + 1)^0.667",
         0.511),
        (_D, (3, 5, 6), 5.649),
        (_D, (5, 5, 5), 3.941),
        (_D, (3, 6, 6), 1.192)]),
    # 4D ---------------------------------------------------------------
    (4, (1, 1, 1, 4), [
        (_L, (1, -1, 1, -1), 1.016),
        (_C, "-1.0*log(-0.001/(0.909*x1 + 1)^2.333"
             " - 0.013*(0.909*x4 + 1)^3*exp(x4) + 1.1 - 0.092*exp(-x2)"
             " - 0.025/(x3 + 1.1))/log(10)", 0.089),
        (_D, (2, 2, 3, 5), 3.270)]),
    (4, (1, 5, 6, 6), [
        (_L, (1, -1, 1, -1), 0.906),
        (_C, "-0.976*(0.14*(0.909*x1 + 1)^0.75"
             " + 0.227*(-1.478*x2 - 1.626)*log(x2 + 1.1)/log(10)"
             " - 0.001/(0.909*x3 + 1)^2.333"
             " - 0.017*exp(-x4)/(0.909*x4 + 1)^0.667 + 1)^0.1", -0.969),
        (_D, (1, 1, 2, 2), 1.404),
        (_D, (2, 2, 2, 3), 0.157)]),
    (4, (1, 4, 5, 5), [
        (_L, (1, 1, -1, 1), 0.988),
        (_C, "0.053*(0.033*(0.909*x1 + 1)^3"
             " + 0.227*(1.478*x2 + 1.626)*log(x2 + 1.1)/log(10) + 1"
             " + 0.084*exp(-x3) + 0.023/(x4 + 1.1))^3"
             "*exp(0.036*(0.909*x1 + 1)^3"
             " + 0.25*(1.478*x2 + 1.626)*log(x2 + 1.1)/log(10)"
             " + 0.092*exp(-x3) + 0.025/(x4 + 1.1))", 0.151),
        (_D, (3, 4, 4, 4), 2.414),
        (_D, (2, 3, 3, 6), 2.160),
        (_D, (2, 2, 2, 5), -0.047)]),
    (4, (1, 3, 3, 3), [
        (_L, (-1, 1, -1, -1), 0.938),
        (_C, "-0.969*(-0.227*x3^4 - 0.046/(0.909*x1 + 1)^0.667"
             " - 0.033*(0.909*x2 + 1)^3 + 0.227*log(1.1 - x4)/log(10)"
             " + 1)^0.75", -0.770),
        (_C, "0.219*(0.227*x3^10 - 0.14*(0.909*x1 + 1)^0.75"
             " + 0.012*(0.909*x4 + 1)^3*exp(x4) + 1 + 0.023/(x2 + 1.1))^3",
         0.228),
        (_D, (2, 2, 2, 6), 0.035)]),
    (4, (2, 2, 4, 5), [
        (_L, (-1, -1, -1, 1), 1.062),
        (_C, "0.488/(-0.227*x2^4 - 0.227*x4^10 + 0.14*(0.909*x1 + 1)^0.75 + 1"
             " - 0.084*exp(-x3))^0.667", 0.520),
        (_C, "0.074*exp(0.051/(0.909*x1 + 1)^0.667"
             " + 0.013*(0.909*x4 + 1)^3*exp(x4) + 0.092*exp(x2)"
             " + 0.092*exp(-x3))/(-0.046/(0.909*x1 + 1)^0.667"
             " - 0.012*(0.909*x4 + 1)^3*exp(x4) - 0.084*exp(x2) + 1"
             " - 0.084*exp(-x3))^0.667", 0.140),
        (_D, (1, 4, 5, 5), 8.879),
        (_D, (3, 3, 3, 4), 1.999)]),
    (4, (1, 3, 5, 5), [
        (_L, (1, 1, 1, -1), 1.016),
        (_C, "-1.0*log(-0.25*x4^10 - 0.051/(0.909*x1 + 1)^0.667"
             " - 0.036*(0.909*x2 + 1)^3 + 1.1 - 0.025/(x3 + 1.1))/log(10)",
         0.081),
        (_C, "-0.998*(-0.227*x4^10"
             " + 0.227*(-1.478*x1 - 1.626)*log(x1 + 1.1)/log(10)"
             " - 0.001/(0.909*x2 + 1)^2.333 + 1 - 0.084*exp(-x3))^0.1", -0.970),
        (_D, (1, 1, 1, 3), 3.115),
        (_D, (1, 3, 5, 6), 2.389),
        (_D, (3, 6, 6, 6), 1.444)]),
]


def bundled_problems() -> list:
    """The 24-problem d.c. library used by the root-node bound study."""
    key = ("bundled",)
    if key not in _FUNC_CACHE:
        out = []
        for k, (n, obj, cons) in enumerate(_BUNDLED, start=1):
            box = BoxDomain(-np.ones(n), np.ones(n))
            objective = dc_composition(obj, box)
            constraints = []
            for kind, payload, rhs in cons:
                if kind == _L:
                    parts = tuple(Prod((Const(float(b)), Var(j)))
                                  for j, b in enumerate(payload))
                    fn = DcFunction(parts[0] if n == 1 else Sum(parts),
                                    Const(0.0), box, name="linear")
                elif kind == _C:
                    fn = DcFunction(parse_expr(payload), Const(0.0), box,
                                    name="convex")
                else:
                    fn = dc_composition(payload, box)
                constraints.append(Constraint(kind, fn, float(rhs)))
            out.append(ProblemInstance(f"problem-{k:02d}", objective, constraints))
        _FUNC_CACHE[key] = out
    return list(_FUNC_CACHE[key])


def write_bundled_files(directory) -> list:
    """Write the bundled problems in the text format; returns the paths."""
    import os

    paths = []
    for p in bundled_problems():
        path = os.path.join(str(directory), f"{p.name.replace('-', '_')}.txt")
        write_problem_file(path, p)
        paths.append(path)
    return paths
