"""Shared oracles for the test suite.

These stay independent of the code paths they check: vertex enumeration is
verified against exhaustive facet-subset solving, the simplex against
basic-solution enumeration, and derivatives against finite differences.
"""

from itertools import combinations

import numpy as np


def exhaustive_vertices(normals, offsets, d):
    """All feasible intersection points of d-subsets of halfspaces."""
    idx = list(combinations(range(len(offsets)), d))
    mats = normals[np.array(idx)]
    dets = np.abs(np.linalg.det(mats))
    pts = []
    for k, sub in enumerate(idx):
        if dets[k] < 1e-10:
            continue
        x = np.linalg.solve(mats[k], offsets[list(sub)])
        if np.all(normals @ x <= offsets + 1e-8):
            pts.append(x)
    return np.asarray(pts).reshape(-1, d)


def dedup_points(pts, tol=1e-7):
    out = []
    for x in pts:
        if not any(np.max(np.abs(x - u)) <= tol for u in out):
            out.append(x)
    return np.asarray(out).reshape(-1, pts.shape[1] if pts.size else 0)


def point_sets_equal(a, b, tol=1e-7):
    """Set equality under tolerance: equal deduplicated counts and mutual
    coverage within tol (Chebyshev)."""
    a, b = dedup_points(a, tol), dedup_points(b, tol)
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    for x in a:
        if np.min(np.max(np.abs(b - x), axis=1)) > tol:
            return False
    for x in b:
        if np.min(np.max(np.abs(a - x), axis=1)) > tol:
            return False
    return True


def lp_enumeration_optimum(lp):
    """Brute-force LP optimum: enumerate all basic points from row/bound
    subsets, keep feasible ones, return the best objective (or None)."""
    n = lp.num_vars
    rows, rhs = [], []
    for i in range(lp.num_rows):
        if lp.senses[i] in ("<=", "=="):
            rows.append(lp.rows[i])
            rhs.append(lp.rhs[i])
        if lp.senses[i] in (">=", "=="):
            rows.append(-lp.rows[i])
            rhs.append(-lp.rhs[i])
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lp.upper[j]):
            rows.append(e.copy())
            rhs.append(lp.upper[j])
        if np.isfinite(lp.lower[j]):
            rows.append(-e)
            rhs.append(-lp.lower[j])
    a = np.asarray(rows)
    b = np.asarray(rhs)
    idx = list(combinations(range(len(b)), n))
    mats = a[np.array(idx)]
    dets = np.abs(np.linalg.det(mats))
    best = None
    for k, sub in enumerate(idx):
        if dets[k] < 1e-9:
            continue
        x = np.linalg.solve(mats[k], b[list(sub)])
        if np.all(a @ x <= b + 1e-7):
            v = float(lp.objective @ x)
            if best is None or v > best:
                best = v
    return best


def fd_gradient(func, x, rel=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = rel * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (func(xp) - func(xm)) / (2.0 * h)
    return g


def fd_hessian_from_grad(grad_func, x, rel=1e-6):
    x = np.asarray(x, dtype=float)
    n = x.size
    h_mat = np.zeros((n, n))
    for i in range(n):
        h = rel * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        h_mat[:, i] = (grad_func(xp) - grad_func(xm)) / (2.0 * h)
    return 0.5 * (h_mat + h_mat.T)


def random_cut_polytope(vp_module, dcexpr_module, rng, max_cuts=12):
    """A random epigraph box with a random admissible cut sequence."""
    n = int(rng.integers(1, 4))
    box = dcexpr_module.BoxDomain(-np.ones(n), np.ones(n))
    poly = vp_module.init_epigraph(box, -1.0, 1.0)
    for _ in range(int(rng.integers(1, max_cuts + 1))):
        nrm = rng.normal(size=n + 1)
        vals = poly.vertices() @ nrm
        if rng.random() < 0.9:
            off = float(rng.uniform(vals.min(), vals.max()))
        else:
            off = float(vals.max() + 0.1)
        poly.add_cut(vp_module.Halfspace(nrm, off))
    return poly
