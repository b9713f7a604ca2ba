"""Dense numerical kernels: symmetric eigendecomposition and an LP solver.

The eigendecomposition uses cyclic Jacobi rotations; matrices here are tiny
(n <= 6 in practice) and Jacobi keeps Q orthogonal to machine precision.

The LP solver is a two-phase primal simplex on a dense tableau with explicit
variable bounds (nonbasic variables may sit at either bound; bound flips are
handled without pivoting).  Equality rows are split into two opposing
inequalities.  Dantzig pricing with a permanent switch to Bland's rule once a
run of degenerate pivots is detected, which is enough anti-cycling for the
small instances this library produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IterationLimit, NotSymmetric

_SYM_TOL = 1e-10
_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-8


# ---------------------------------------------------------------------------
# eigendecomposition


@dataclass
class EigDecomp:
    """Q columns are eigenvectors; eigenvalues sorted descending."""

    q: np.ndarray
    eigenvalues: np.ndarray

    @property
    def lam(self) -> np.ndarray:
        return self.eigenvalues

    def reconstruct(self) -> np.ndarray:
        return (self.q * self.eigenvalues) @ self.q.T


def _check_symmetric(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotSymmetric("matrix must be square")
    if h.size and np.max(np.abs(h - h.T)) > _SYM_TOL:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(h - h.T)):.2e} > {_SYM_TOL}")
    return 0.5 * (h + h.T)


def sym_eig(h) -> EigDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps."""
    a = _check_symmetric(h)
    n = a.shape[0]
    q = np.eye(n)
    if n > 1:
        scale = max(1.0, float(np.max(np.abs(a))))
        for _ in range(200):
            off = 0.0
            for p in range(n - 1):
                for r in range(p + 1, n):
                    apr = a[p, r]
                    off = max(off, abs(apr))
                    if abs(apr) <= 1e-15 * scale:
                        continue
                    theta = 0.5 * (a[r, r] - a[p, p]) / apr
                    t = np.sign(theta) if theta != 0 else 1.0
                    t = t / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    rot = np.array([[c, s], [-s, c]])
                    a[[p, r], :] = rot.T @ a[[p, r], :]
                    a[:, [p, r]] = a[:, [p, r]] @ rot
                    q[:, [p, r]] = q[:, [p, r]] @ rot
                    a[p, r] = a[r, p] = 0.0
            if off <= 1e-15 * scale:
                break
    lam = np.diag(a).copy()
    order = np.argsort(-lam, kind="stable")
    return EigDecomp(q[:, order], lam[order])


def psd_check(h, tol: float) -> bool:
    """True iff the minimum eigenvalue of symmetric ``h`` is >= -tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    dec = sym_eig(h)
    return bool(dec.eigenvalues[-1] >= -tol) if dec.eigenvalues.size else True


# ---------------------------------------------------------------------------
# linear programming

LESS, EQUAL, GREATER = "<=", "==", ">="


@dataclass
class LpInstance:
    """Dense LP: maximize objective @ x subject to rows and variable bounds.

    senses entries are '<=', '==', '>='; lower/upper may be +-inf.
    """

    objective: np.ndarray
    rows: np.ndarray
    senses: list
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.size
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, n)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        m = self.rows.shape[0]
        if len(self.senses) != m or self.rhs.size != m:
            raise ValueError("row count mismatch between rows/senses/rhs")
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound length mismatch")
        for s in self.senses:
            if s not in (LESS, EQUAL, GREATER):
                raise ValueError(f"bad sense {s!r}")
        if np.isnan(self.objective).any() or np.isnan(self.rows).any() \
                or np.isnan(self.rhs).any():
            raise ValueError("NaN coefficients are not allowed")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]


@dataclass
class LpSolution:
    status: str                    # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective: float | None


def lp_to_text(lp: LpInstance) -> str:
    """Plain-text tableau dump for debugging."""
    out = ["max  " + "  ".join(f"{c:+.6g}" for c in lp.objective)]
    for i in range(lp.num_rows):
        coefs = "  ".join(f"{v:+.6g}" for v in lp.rows[i])
        out.append(f"r{i:<3d} {coefs}  {lp.senses[i]} {lp.rhs[i]:.6g}")
    bound = "  ".join(f"[{lo:.6g},{up:.6g}]" for lo, up in zip(lp.lower, lp.upper))
    out.append("bnds " + bound)
    return "\n".join(out)


class _Tableau:
    """Bounded-variable primal simplex working state."""

    def __init__(self, a, b, upper, pivot_cap):
        self.m, self.n = a.shape
        self.tab = a.astype(float)          # B^-1 A, updated in place
        self.xb = b.astype(float)           # current basic values
        self.upper = upper                  # per-column upper bound (lb is 0)
        self.basis = list(range(self.n - self.m, self.n))  # filled by caller
        self.at_upper = np.zeros(self.n, dtype=bool)
        self.pivots = 0
        self.pivot_cap = pivot_cap
        self.bland = False
        self.stall = 0

    def reduced_costs(self, cost):
        cb = cost[self.basis]
        return cost - cb @ self.tab

    def solve_phase(self, cost, allowed):
        """Minimize cost over the current basis; ``allowed`` masks columns
        permitted to enter. Returns 'optimal' or 'unbounded'."""
        in_basis = np.zeros(self.n, dtype=bool)
        in_basis[self.basis] = True
        while True:
            r = self.reduced_costs(cost)
            in_basis[:] = False
            in_basis[self.basis] = True
            lower_ok = (~in_basis) & allowed & (~self.at_upper) & (r < -_PIVOT_TOL)
            upper_ok = (~in_basis) & allowed & self.at_upper & (r > _PIVOT_TOL)
            cand = np.flatnonzero(lower_ok | upper_ok)
            if cand.size == 0:
                return "optimal"
            if self.bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(r[cand]))])
            from_upper = bool(self.at_upper[j])
            if not self._step(j, from_upper):
                return "unbounded"
            if self.pivots > self.pivot_cap:
                raise IterationLimit(f"simplex exceeded {self.pivot_cap} pivots")

    def _step(self, j, from_upper):
        col = self.tab[:, j]
        # direction of basic change per unit of entering movement t >= 0
        delta = col if from_upper else -col
        limit = self.upper[j]                      # own-span bound flip
        t_best, leave, leave_to_upper = limit, -1, False
        ub = self.upper[self.basis]
        # basic decreasing toward 0
        dec = delta < -_PIVOT_TOL
        if np.any(dec):
            ratios = -self.xb[dec] / delta[dec]
            k = int(np.argmin(ratios))
            if ratios[k] < t_best - 1e-15:
                idxs = np.flatnonzero(dec)
                t_best, leave, leave_to_upper = float(ratios[k]), int(idxs[k]), False
        # basic increasing toward its upper bound
        inc = (delta > _PIVOT_TOL) & np.isfinite(ub)
        if np.any(inc):
            ratios = (ub[inc] - self.xb[inc]) / delta[inc]
            k = int(np.argmin(ratios))
            if ratios[k] < t_best - 1e-15:
                idxs = np.flatnonzero(inc)
                t_best, leave, leave_to_upper = float(ratios[k]), int(idxs[k]), True
        if self.bland and leave >= 0:
            # re-scan for the lowest-index leaving variable among ties
            ties = []
            for i in range(self.m):
                if delta[i] < -_PIVOT_TOL:
                    ti = -self.xb[i] / delta[i]
                    if ti <= t_best + 1e-12:
                        ties.append((self.basis[i], i, False))
                elif delta[i] > _PIVOT_TOL and np.isfinite(self.upper[self.basis[i]]):
                    ti = (self.upper[self.basis[i]] - self.xb[i]) / delta[i]
                    if ti <= t_best + 1e-12:
                        ties.append((self.basis[i], i, True))
            if ties:
                _, leave, leave_to_upper = min(ties)
        if not np.isfinite(t_best):
            return False
        t_best = max(t_best, 0.0)
        self.pivots += 1
        self.stall = self.stall + 1 if t_best <= 1e-12 else 0
        if self.stall >= 64:
            self.bland = True
        self.xb += t_best * delta
        if leave < 0:
            # bound flip, no basis change
            self.at_upper[j] = not from_upper
            return True
        enter_val = (self.upper[j] - t_best) if from_upper else t_best
        lv = self.basis[leave]
        self.at_upper[lv] = leave_to_upper
        piv = self.tab[leave, j]
        self.tab[leave] /= piv
        others = np.arange(self.m) != leave
        self.tab[others] -= np.outer(self.tab[others, j], self.tab[leave])
        self.basis[leave] = j
        self.xb[leave] = enter_val
        self.at_upper[j] = False
        # clamp tiny negatives from roundoff
        np.clip(self.xb, 0.0, None, out=self.xb)
        return True


def solve_lp(lp: LpInstance, pivot_cap: int = 100_000) -> LpSolution:
    """Solve an LpInstance; statuses are 'optimal', 'infeasible', 'unbounded'.

    Raises IterationLimit if the pivot cap is exceeded (numerical trouble).
    """
    n = lp.num_vars
    # rows -> all '<=' form
    rows, rhs = [], []
    for i in range(lp.num_rows):
        if lp.senses[i] in (LESS, EQUAL):
            rows.append(lp.rows[i]); rhs.append(lp.rhs[i])
        if lp.senses[i] in (GREATER, EQUAL):
            rows.append(-lp.rows[i]); rhs.append(-lp.rhs[i])
    a = np.asarray(rows, dtype=float).reshape(-1, n)
    b = np.asarray(rhs, dtype=float)
    m = a.shape[0]

    # variables -> z >= 0 with optional finite upper bound
    cols, shift, col_upper, mapping = [], np.zeros(n), [], []
    for j in range(n):
        lo, up = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            shift[j] = lo
            cols.append(a[:, j] if m else np.zeros(0))
            col_upper.append(up - lo if np.isfinite(up) else np.inf)
            mapping.append((j, 1.0))
        elif np.isfinite(up):
            shift[j] = up
            cols.append(-a[:, j] if m else np.zeros(0))
            col_upper.append(np.inf)
            mapping.append((j, -1.0))
        else:
            cols.append(a[:, j] if m else np.zeros(0))
            col_upper.append(np.inf)
            mapping.append((j, 1.0))
            cols.append(-a[:, j] if m else np.zeros(0))
            col_upper.append(np.inf)
            mapping.append((j, -1.0))
    nz = len(cols)
    az = np.stack(cols, axis=1) if m else np.zeros((0, nz))
    bz = b - a @ shift if m else b
    cz = np.zeros(nz)
    for k, (j, sgn) in enumerate(mapping):
        cz[k] += -lp.objective[j] * sgn          # minimize -objective
    const = float(lp.objective @ shift)

    # slacks (+I) and artificials for rows with negative rhs
    neg = bz < 0
    az = np.where(neg[:, None], -az, az)
    bz = np.where(neg, -bz, bz)
    slack = np.diag(np.where(neg, -1.0, 1.0))
    n_art = int(np.count_nonzero(neg))
    art = np.zeros((m, n_art))
    art[np.flatnonzero(neg), np.arange(n_art)] = 1.0
    full = np.hstack([az, slack, art])
    upper_full = np.concatenate([np.asarray(col_upper),
                                 np.full(m + n_art, np.inf)])
    tb = _Tableau(full, bz, upper_full, pivot_cap)
    basis = []
    k_art = 0
    for i in range(m):
        if neg[i]:
            basis.append(nz + m + k_art)
            k_art += 1
        else:
            basis.append(nz + i)
    tb.basis = basis

    allowed = np.ones(full.shape[1], dtype=bool)
    if n_art:
        phase1 = np.zeros(full.shape[1])
        phase1[nz + m:] = 1.0
        tb.solve_phase(phase1, allowed)
        if float(phase1[tb.basis] @ tb.xb) > _FEAS_TOL * max(1.0, np.abs(bz).max(initial=0.0)):
            return LpSolution("infeasible", None, None)
        _purge_artificials(tb, nz + m)
        allowed[nz + m:] = False

    cost = np.zeros(full.shape[1])
    cost[:nz] = cz
    status = tb.solve_phase(cost, allowed)
    if status == "unbounded":
        return LpSolution("unbounded", None, None)

    zfull = np.where(tb.at_upper, np.where(np.isfinite(tb.upper), tb.upper, 0.0), 0.0)
    zfull[tb.basis] = tb.xb
    x = shift.copy()
    for k, (j, sgn) in enumerate(mapping):
        x[j] += sgn * zfull[k]
    return LpSolution("optimal", x, float(lp.objective @ x))


def _purge_artificials(tb: _Tableau, first_art: int) -> None:
    """Pivot basic artificials out; drop rows where that is impossible."""
    drop = []
    for i in range(tb.m):
        if tb.basis[i] < first_art:
            continue
        row = tb.tab[i, :first_art]
        cand = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
        cand = [j for j in cand if j not in tb.basis]
        if cand:
            j = int(cand[0])
            piv = tb.tab[i, j]
            tb.tab[i] /= piv
            others = np.arange(tb.m) != i
            tb.tab[others] -= np.outer(tb.tab[others, j], tb.tab[i])
            tb.basis[i] = j
            tb.at_upper[j] = False
        else:
            drop.append(i)
    if drop:
        keep = np.setdiff1d(np.arange(tb.m), drop)
        tb.tab = tb.tab[keep]
        tb.xb = tb.xb[keep]
        tb.basis = [tb.basis[i] for i in keep]
        tb.m = len(keep)
