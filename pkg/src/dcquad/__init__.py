"""dcquad: convex quadratic underestimators for difference-of-convex functions.

The package constructs convex quadratic underestimators of twice-differentiable
d.c. functions over box domains via a cutting-plane algorithm, provides a
hierarchy of parameter-update methods (scalar, diagonal, matrix scalings, each
with an optional downward shift), measures underestimator tightness by a
hypervolume ratio, ships and generates d.c. benchmark problems, and computes
root-node lower bounds from convex QCQP relaxations.

Modules
-------
dcexpr     expression trees, exact derivatives, range scaling, text grammar
linops     symmetric eigendecomposition (Jacobi) and a dense simplex LP solver
vpoly      incremental vertex enumeration of the epigraph outer approximation
quadue     underestimator forms, the construction algorithm, method hierarchy
tightness  Latin hypercube sampling and the hypervolume tightness metric
benchgen   benchmark function library, problem generator, bundled problems
relaxbound QCQP relaxations, Kelley bounding, reference optima, gap study
cli        command-line front end (``dcquad <command> ...``)
"""

from . import errors
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
    evaluate,
    evaluate_many,
    gradient,
    hessian,
    parse_expr,
    scale_range,
)
from .linops import EigDecomp, LpInstance, LpSolution, psd_check, solve_lp, sym_eig
from .quadue import (
    METHODS,
    ConstructionReport,
    QuadUnderestimator,
    check_local_convexity,
    construct,
)
from .tightness import MetricResult, SamplePlan, latin_hypercube, metric
from .vpoly import Halfspace, VertexPolytope, init_epigraph

__all__ = [
    "errors",
    "BoxDomain", "Const", "DcFunction", "Div", "Exp", "Expr", "Log", "Pow",
    "Prod", "Sum", "Var", "evaluate", "evaluate_many", "gradient", "hessian",
    "parse_expr", "scale_range",
    "EigDecomp", "LpInstance", "LpSolution", "psd_check", "solve_lp", "sym_eig",
    "METHODS", "ConstructionReport", "QuadUnderestimator",
    "check_local_convexity", "construct",
    "MetricResult", "SamplePlan", "latin_hypercube", "metric",
    "Halfspace", "VertexPolytope", "init_epigraph",
]

__version__ = "0.1.0"
