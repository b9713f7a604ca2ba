"""Exception types shared across the package."""


class DcquadError(Exception):
    """Base class for all library errors."""


class ParseError(DcquadError):
    """Malformed expression text or data file."""


class DomainViolation(DcquadError):
    """Evaluation hit a domain guard: log of a non-positive value, a
    non-integer power of a non-positive base, or division by (near) zero."""


class DegenerateRange(DcquadError):
    """Range scaling is undefined because max{|min f|, |max f|} is ~0."""


class NotSymmetric(DcquadError):
    """A matrix argument was expected to be symmetric and is not."""


class IterationLimit(DcquadError):
    """An iterative routine exceeded its iteration/pivot cap."""


class NumericalFailure(DcquadError):
    """A numerically impossible state was reached (e.g. an LP that must be
    feasible reported infeasible)."""


class DimensionTooLarge(DcquadError):
    """Polytope dimension exceeds the configured cap."""


class EmptyPolytope(DcquadError):
    """A cut removed every vertex; upstream cuts are inconsistent."""


class DegenerateCurvature(DcquadError):
    """The scalar update denominator (x*-x0)' H (x*-x0) vanished."""


class NotLocallyConvex(DcquadError):
    """The Hessian at the requested point of construction is not PSD."""


class ShiftRequired(DcquadError):
    """A method without shift cannot produce a valid underestimator at this
    point of construction; rerun with a shifted method (SS/UDS/DS/MS)."""


class DegenerateDenominator(DcquadError):
    """Tightness metric denominator is ~0 (the function is linear)."""


class DegenerateSpread(DcquadError):
    """A constraint expression is constant on the generation sample."""


class CatalogExhausted(DcquadError):
    """Fewer d.c. compositions exist than the requested constraint count."""


class NoValidPoint(DcquadError):
    """No locally convex point of construction found within the draw budget."""


class InvalidConfig(DcquadError):
    """A configuration value is outside its allowed range."""


class InfeasibleInstance(DcquadError):
    """No feasible point of the problem instance could be found."""
