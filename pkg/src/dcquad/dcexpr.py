"""Expression trees over box domains.

Supported node kinds: constants, variables, sums, products, quotients,
integer and real powers, exp, and natural log.  Values, gradients and dense
Hessians are computed by forward-mode accumulation over the tree, which is
exact (no finite differencing) and cheap for the small dimensions (n <= 4)
this library targets.

Expressions parse from / write to a plain infix grammar::

    expr    :=  term  (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  ('-' | '+')* power
    power   :=  atom ('^' unary)?          # exponent must fold to a constant
    atom    :=  NUMBER | 'x'<k> | 'exp' '(' expr ')' | 'log' '(' expr ')'
              | '(' expr ')'

Variables are ``x1 .. xn`` (1-based in text, 0-based indices in the tree).
``log`` is the natural logarithm.  Real powers and logs carry domain guards;
a DcFunction certifies at construction, by interval evaluation over its box,
that no guard can be breached inside the box.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRange, DomainViolation, InvalidConfig, ParseError

_DIV_TOL = 1e-12


class _GuardUncertain(Exception):
    """Interval evaluation could not decide a guard; caller should split."""


# ---------------------------------------------------------------------------
# nodes


class Expr:
    """Base expression node. Immutable after construction; evaluation is pure."""

    def value(self, x) -> float:
        """Evaluate at a single point ``x`` (array-like of shape (n,))."""
        return float(self._ev(np.asarray(x, dtype=float)))

    def value_many(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate at many points at once; ``pts`` has shape (m, n)."""
        pts = np.asarray(pts, dtype=float)
        out = self._ev(pts.T)
        if np.ndim(out) == 0:
            return np.full(pts.shape[0], float(out))
        return np.asarray(out, dtype=float)

    # subclasses implement:
    #   _ev(cols)           cols[i] is coordinate i (scalar or (m,) array)
    #   _fwd(x, n)          -> (value, grad (n,), hess (n, n)) at one point
    #   _interval(lo, hi)   -> (low, high) bounds over the box [lo, hi]
    #   _max_var()          -> largest variable index used, or -1
    #   _text(prec)         -> infix text, parenthesized for context ``prec``

    def _max_var(self) -> int:
        raise NotImplementedError

    def to_text(self) -> str:
        return self._text(0)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"{type(self).__name__}({self.to_text()})"


# precedence levels used by _text: 0 sum, 1 product, 2 unary, 3 power/atom


def _paren(s: str, node_prec: int, ctx_prec: int) -> str:
    return f"({s})" if node_prec < ctx_prec else s


@dataclass(frozen=True)
class Const(Expr):
    val: float

    def _ev(self, cols):
        return self.val

    def _fwd(self, x, n):
        return self.val, np.zeros(n), np.zeros((n, n))

    def _interval(self, lo, hi):
        return self.val, self.val

    def _max_var(self):
        return -1

    def _text(self, prec):
        if self.val < 0:
            return _paren(repr(self.val), 2, prec)
        return repr(self.val)


@dataclass(frozen=True)
class Var(Expr):
    index: int

    def _ev(self, cols):
        return cols[self.index]

    def _fwd(self, x, n):
        g = np.zeros(n)
        g[self.index] = 1.0
        return x[self.index], g, np.zeros((n, n))

    def _interval(self, lo, hi):
        return lo[self.index], hi[self.index]

    def _max_var(self):
        return self.index

    def _text(self, prec):
        return f"x{self.index + 1}"


@dataclass(frozen=True)
class Sum(Expr):
    children: tuple

    def _ev(self, cols):
        out = self.children[0]._ev(cols)
        for c in self.children[1:]:
            out = out + c._ev(cols)
        return out

    def _fwd(self, x, n):
        v, g, h = self.children[0]._fwd(x, n)
        for c in self.children[1:]:
            cv, cg, ch = c._fwd(x, n)
            v, g, h = v + cv, g + cg, h + ch
        return v, g, h

    def _interval(self, lo, hi):
        a, b = 0.0, 0.0
        for c in self.children:
            ca, cb = c._interval(lo, hi)
            a, b = a + ca, b + cb
        return a, b

    def _max_var(self):
        return max(c._max_var() for c in self.children)

    def _text(self, prec):
        parts = [self.children[0]._text(0)]
        for c in self.children[1:]:
            t = c._text(0)
            parts.append(f"- {t[1:].lstrip()}" if t.startswith("-") else f"+ {t}")
        return _paren(" ".join(parts), 0, prec)


@dataclass(frozen=True)
class Prod(Expr):
    children: tuple

    def _ev(self, cols):
        out = self.children[0]._ev(cols)
        for c in self.children[1:]:
            out = out * c._ev(cols)
        return out

    def _fwd(self, x, n):
        v, g, h = self.children[0]._fwd(x, n)
        for c in self.children[1:]:
            cv, cg, ch = c._fwd(x, n)
            h = h * cv + np.outer(g, cg) + np.outer(cg, g) + v * ch
            g = g * cv + v * cg
            v = v * cv
        return v, g, h

    def _interval(self, lo, hi):
        a, b = self.children[0]._interval(lo, hi)
        for c in self.children[1:]:
            ca, cb = c._interval(lo, hi)
            prods = (a * ca, a * cb, b * ca, b * cb)
            a, b = min(prods), max(prods)
        return a, b

    def _max_var(self):
        return max(c._max_var() for c in self.children)

    def _text(self, prec):
        ch = self.children
        if isinstance(ch[0], Const) and ch[0].val == -1.0 and len(ch) > 1:
            body = "-" + "*".join(c._text(1) for c in ch[1:])
        else:
            body = "*".join(c._text(1) for c in ch)
        return _paren(body, 1, prec)


def _recip_interval(a, b):
    """Interval of 1/x over [a, b]; the interval must exclude ~0."""
    if a > _DIV_TOL or b < -_DIV_TOL:
        return 1.0 / b, 1.0 / a
    if abs(a) <= _DIV_TOL and abs(b) <= _DIV_TOL:
        raise DomainViolation("division by an interval that is ~0 everywhere")
    raise _GuardUncertain


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr

    def _ev(self, cols):
        d = self.den._ev(cols)
        if np.any(np.abs(d) <= _DIV_TOL):
            raise DomainViolation("division by (near) zero")
        return self.num._ev(cols) / d

    def _fwd(self, x, n):
        uv, ug, uh = self.num._fwd(x, n)
        dv, dg, dh = self.den._fwd(x, n)
        if abs(dv) <= _DIV_TOL:
            raise DomainViolation("division by (near) zero")
        w = uv / dv
        wg = (ug - w * dg) / dv
        wh = (uh - np.outer(wg, dg) - np.outer(dg, wg) - w * dh) / dv
        return w, wg, wh

    def _interval(self, lo, hi):
        ra, rb = _recip_interval(*self.den._interval(lo, hi))
        a, b = self.num._interval(lo, hi)
        prods = (a * ra, a * rb, b * ra, b * rb)
        return min(prods), max(prods)

    def _max_var(self):
        return max(self.num._max_var(), self.den._max_var())

    def _text(self, prec):
        return _paren(f"{self.num._text(1)}/{self.den._text(2)}", 1, prec)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float
    is_int: bool = field(init=False)

    def __post_init__(self):
        e = float(self.exponent)
        object.__setattr__(self, "exponent", e)
        object.__setattr__(self, "is_int", float(e).is_integer())

    def _ev(self, cols):
        b = self.base._ev(cols)
        p = self.exponent
        if self.is_int:
            if p < 0 and np.any(np.abs(b) <= _DIV_TOL):
                raise DomainViolation("negative power of a (near) zero base")
        elif np.any(np.asarray(b) <= 0.0):
            raise DomainViolation("non-integer power of a non-positive base")
        return b ** p

    def _fwd(self, x, n):
        bv, bg, bh = self.base._fwd(x, n)
        p = self.exponent
        if self.is_int:
            if p < 0 and abs(bv) <= _DIV_TOL:
                raise DomainViolation("negative power of a (near) zero base")
        elif bv <= 0.0:
            raise DomainViolation("non-integer power of a non-positive base")
        if p == 0.0:
            return 1.0, np.zeros(n), np.zeros((n, n))
        v = bv ** p
        d1 = p * bv ** (p - 1.0)
        d2 = p * (p - 1.0) * bv ** (p - 2.0) if p != 1.0 else 0.0
        g = d1 * bg
        h = d1 * bh + d2 * np.outer(bg, bg)
        return v, g, h

    def _interval(self, lo, hi):
        a, b = self.base._interval(lo, hi)
        p = self.exponent
        if self.is_int:
            k = int(p)
            if k == 0:
                return 1.0, 1.0
            if k > 0:
                if k % 2 == 1 or a >= 0.0:
                    return a ** k, b ** k
                if b <= 0.0:
                    return b ** k, a ** k
                return 0.0, max(a ** k, b ** k)
            ra, rb = _recip_interval(a, b)
            return Pow._const_pow(ra, rb, -k)
        if a > 0.0:
            va, vb = a ** p, b ** p
            return (va, vb) if p > 0 else (vb, va)
        if b <= 0.0:
            raise DomainViolation("non-integer power of a non-positive base")
        raise _GuardUncertain

    @staticmethod
    def _const_pow(a, b, k):
        # positive-integer power of an interval that excludes zero
        if k % 2 == 1 or a >= 0.0:
            return a ** k, b ** k
        return b ** k, a ** k

    def _max_var(self):
        return self.base._max_var()

    def _text(self, prec):
        e = self.exponent
        etxt = str(int(e)) if self.is_int else repr(e)
        if e < 0:
            etxt = f"({etxt})"
        return _paren(f"{self.base._text(3)}^{etxt}", 2, prec)


@dataclass(frozen=True)
class Exp(Expr):
    child: Expr

    def _ev(self, cols):
        return np.exp(self.child._ev(cols))

    def _fwd(self, x, n):
        cv, cg, ch = self.child._fwd(x, n)
        v = math.exp(cv)
        return v, v * cg, v * (ch + np.outer(cg, cg))

    def _interval(self, lo, hi):
        a, b = self.child._interval(lo, hi)
        return math.exp(a), math.exp(b)

    def _max_var(self):
        return self.child._max_var()

    def _text(self, prec):
        return f"exp({self.child._text(0)})"


@dataclass(frozen=True)
class Log(Expr):
    child: Expr

    def _ev(self, cols):
        c = self.child._ev(cols)
        if np.any(np.asarray(c) <= 0.0):
            raise DomainViolation("log of a non-positive value")
        return np.log(c)

    def _fwd(self, x, n):
        cv, cg, ch = self.child._fwd(x, n)
        if cv <= 0.0:
            raise DomainViolation("log of a non-positive value")
        g = cg / cv
        return math.log(cv), g, ch / cv - np.outer(g, g)

    def _interval(self, lo, hi):
        a, b = self.child._interval(lo, hi)
        if a > 0.0:
            return math.log(a), math.log(b)
        if b <= 0.0:
            raise DomainViolation("log of a non-positive value")
        raise _GuardUncertain

    def _max_var(self):
        return self.child._max_var()

    def _text(self, prec):
        return f"log({self.child._text(0)})"


# ---------------------------------------------------------------------------
# operations on expressions


def evaluate(expr: Expr, x) -> float:
    """Value of ``expr`` at point ``x``; raises DomainViolation on guards."""
    return expr.value(x)


def evaluate_many(expr: Expr, pts: np.ndarray) -> np.ndarray:
    return expr.value_many(pts)


def gradient(expr: Expr, x, n: int | None = None) -> np.ndarray:
    """Exact gradient at ``x`` by forward-mode accumulation."""
    x = np.asarray(x, dtype=float)
    n = x.size if n is None else n
    _, g, _ = expr._fwd(x, n)
    return g


def hessian(expr: Expr, x, n: int | None = None) -> np.ndarray:
    """Exact dense symmetric Hessian at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size if n is None else n
    _, _, h = expr._fwd(x, n)
    return h


def value_grad_hessian(expr: Expr, x, n: int | None = None):
    x = np.asarray(x, dtype=float)
    n = x.size if n is None else n
    return expr._fwd(x, n)


# ---------------------------------------------------------------------------
# box domains and d.c. functions


class BoxDomain:
    """Per-coordinate bounds; degenerate (lower >= upper) boxes are rejected."""

    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower/upper must be 1-d and of equal length")
        if not np.all(self.lower < self.upper):
            raise ValueError("box must satisfy lower[i] < upper[i] strictly")

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def corners(self) -> np.ndarray:
        """All 2^n corner points, shape (2^n, n)."""
        n = self.dimension
        bits = np.arange(2 ** n)[:, None] >> np.arange(n)[None, :] & 1
        return np.where(bits == 1, self.upper, self.lower).astype(float)

    def grid(self, per_dim: int) -> np.ndarray:
        """Tensor grid including endpoints, shape (per_dim^n, n)."""
        axes = [np.linspace(self.lower[i], self.upper[i], per_dim)
                for i in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def __repr__(self):
        pairs = ", ".join(f"[{a:g}, {b:g}]" for a, b in zip(self.lower, self.upper))
        return f"BoxDomain({pairs})"


def _certify_guards(expr: Expr, lo, hi, max_depth: int = 8, max_cells: int = 4096):
    """Prove by interval evaluation (with bisection on uncertainty) that no
    domain guard can trigger anywhere in [lo, hi]."""
    stack = [(np.asarray(lo, float), np.asarray(hi, float), 0)]
    cells = 0
    while stack:
        a, b, depth = stack.pop()
        cells += 1
        if cells > max_cells:
            raise DomainViolation("guard certification budget exhausted")
        try:
            expr._interval(a, b)
        except _GuardUncertain:
            if depth >= max_depth:
                raise DomainViolation(
                    "cannot certify domain guards over the box") from None
            i = int(np.argmax(b - a))
            mid = 0.5 * (a[i] + b[i])
            b1 = b.copy(); b1[i] = mid
            a2 = a.copy(); a2[i] = mid
            stack.append((a, b1, depth + 1))
            stack.append((a2, b, depth + 1))


def interval_bounds(expr: Expr, box: BoxDomain):
    """Conservative (lo, hi) bounds of ``expr`` over ``box``."""
    return expr._interval(box.lower, box.upper)


class DcFunction:
    """f(x) = h(x) - g(x) with h, g convex over a box domain.

    Convexity of the supplied split is trusted, not verified symbolically;
    local convexity of f is checked where the library needs it (at points of
    construction).  Construction certifies, via interval evaluation over the
    box, that evaluating h and g anywhere inside the box cannot breach a
    domain guard.
    """

    def __init__(self, h: Expr, g: Expr, box: BoxDomain, name: str | None = None,
                 scale: float | None = None, check_guards: bool = True):
        self.h = h
        self.g = g
        self.box = box
        self.name = name
        self.scale = scale
        n = box.dimension
        hi_var = max(h._max_var(), g._max_var())
        if hi_var >= n:
            raise ValueError(f"expression uses x{hi_var + 1} but the box has "
                             f"dimension {n}")
        if check_guards:
            _certify_guards(h, box.lower, box.upper)
            _certify_guards(g, box.lower, box.upper)

    @property
    def n(self) -> int:
        return self.box.dimension

    def value(self, x) -> float:
        return self.h.value(x) - self.g.value(x)

    def value_many(self, pts: np.ndarray) -> np.ndarray:
        return self.h.value_many(pts) - self.g.value_many(pts)

    def grad(self, x) -> np.ndarray:
        return gradient(self.h, x, self.n) - gradient(self.g, x, self.n)

    def hessian(self, x) -> np.ndarray:
        return hessian(self.h, x, self.n) - hessian(self.g, x, self.n)

    def value_grad_hessian(self, x):
        hv, hg, hh = self.h._fwd(np.asarray(x, float), self.n)
        gv, gg, gh = self.g._fwd(np.asarray(x, float), self.n)
        return hv - gv, hg - gg, hh - gh

    def __repr__(self):
        nm = self.name or "<anonymous>"
        return f"DcFunction({nm}, n={self.n})"


# ---------------------------------------------------------------------------
# range scaling


def _polish(value_many, x, step, box: BoxDomain, maximize: bool, iters: int = 20):
    """Pattern-search refinement of a grid extremum, clipped to the box."""
    n = box.dimension
    best = float(value_many(x[None, :])[0])
    sign = 1.0 if maximize else -1.0
    for _ in range(iters):
        cand = np.repeat(x[None, :], 2 * n, axis=0)
        for i in range(n):
            cand[2 * i, i] += step[i]
            cand[2 * i + 1, i] -= step[i]
        np.clip(cand, box.lower, box.upper, out=cand)
        vals = value_many(cand)
        k = int(np.argmax(sign * vals))
        if sign * vals[k] > sign * best:
            best = float(vals[k])
            x = cand[k]
        else:
            step = step * 0.5
    return x, best


def estimate_range(f: DcFunction, grid_density: int | None = None):
    """(min, max) of f over its box: dense grid plus local pattern-search
    polish from the best grid points."""
    n = f.n
    if grid_density is None:
        grid_density = 512 if n <= 2 else 64
    if grid_density < 16:
        raise InvalidConfig("grid_density must be >= 16")
    pts = f.box.grid(grid_density)
    vals = f.value_many(pts)
    step = f.box.width / (grid_density - 1)
    _, fmax = _polish(f.value_many, pts[int(np.argmax(vals))].copy(), step.copy(),
                      f.box, maximize=True)
    _, fmin = _polish(f.value_many, pts[int(np.argmin(vals))].copy(), step.copy(),
                      f.box, maximize=False)
    return fmin, fmax


def scale_range(f: DcFunction, grid_density: int | None = None) -> DcFunction:
    """Return f with h and g multiplied by s = 1/max{|min f|, |max f|} so the
    range of f lies within [-1, 1]; records s on the returned function."""
    fmin, fmax = estimate_range(f, grid_density)
    m = max(abs(fmin), abs(fmax))
    if m < 1e-12:
        raise DegenerateRange(f"range magnitude {m:g} is below 1e-12")
    s = 1.0 / m
    return DcFunction(Prod((Const(s), f.h)), Prod((Const(s), f.g)), f.box,
                      name=f.name, scale=s, check_guards=False)


# ---------------------------------------------------------------------------
# parsing


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
                    r"|\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"bad token at: {text[pos:pos + 12]!r}")
        pos = m.end()
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, got {val!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            t = self.term()
            terms.append(t if op == "+" else Prod((Const(-1.0), t)))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.unary()
            if op == "*":
                ch = node.children + (rhs,) if isinstance(node, Prod) else (node, rhs)
                node = Prod(ch)
            else:
                node = Div(node, rhs)
        return node

    def unary(self) -> Expr:
        neg = False
        while self.peek() == ("op", "-") or self.peek() == ("op", "+"):
            _, op = self.take()
            neg ^= (op == "-")
        node = self.power()
        return Prod((Const(-1.0), node)) if neg else node

    def power(self) -> Expr:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            exp = self.unary()
            if exp._max_var() >= 0:
                raise ParseError("exponent must not contain variables")
            return Pow(base, exp.value(np.zeros(1)))
        return base

    def atom(self) -> Expr:
        kind, val = self.take()
        if kind == "num":
            return Const(val)
        if kind == "name":
            if val in ("exp", "log"):
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return Exp(inner) if val == "exp" else Log(inner)
            m = re.fullmatch(r"x([1-9][0-9]*)", val)
            if not m:
                raise ParseError(f"unknown identifier {val!r}")
            return Var(int(m.group(1)) - 1)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected token {val!r}")


def parse_expr(text: str) -> Expr:
    """Parse infix expression text into a tree."""
    return _Parser(_tokenize(text)).parse()


# ---------------------------------------------------------------------------
# functions file format
#
# One named d.c. function per record line:
#
#   function: <name> | <n> | <lo1> <up1> [<lo2> <up2> ...] | <h expr> | <g expr>
#
# '#' starts a comment; blank lines are ignored.


def format_function(f: DcFunction) -> str:
    box = " ".join(repr(float(v))
                   for pair in zip(f.box.lower, f.box.upper) for v in pair)
    name = f.name or "unnamed"
    return f"function: {name} | {f.n} | {box} | {f.h.to_text()} | {f.g.to_text()}"


def parse_function_line(line: str) -> DcFunction:
    body = line.split(":", 1)[1]
    parts = [p.strip() for p in body.split("|")]
    if len(parts) != 5:
        raise ParseError(f"function record needs 5 fields, got {len(parts)}")
    name, n_txt, box_txt, h_txt, g_txt = parts
    n = int(n_txt)
    nums = [float(v) for v in box_txt.split()]
    if len(nums) != 2 * n:
        raise ParseError(f"box needs {2 * n} numbers, got {len(nums)}")
    box = BoxDomain(nums[0::2], nums[1::2])
    return DcFunction(parse_expr(h_txt), parse_expr(g_txt), box, name=name)


def parse_functions_text(text: str) -> list:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("function:"):
            raise ParseError(f"unexpected line: {raw!r}")
        out.append(parse_function_line(line))
    return out


def read_functions_file(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_functions_text(fh.read())


def write_functions_file(path, functions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in functions:
            fh.write(format_function(f) + "\n")
