"""Incremental vertex enumeration of a halfspace-bounded polytope.

The polytope starts as a box B x [t_lo, t_hi] in R^(n+1) (the outer
approximation of the epigraph constraint h(x) <= t) and is refined by cuts.
Each cut removes the strictly violating vertices; every edge between a
removed and a kept vertex contributes one candidate vertex at the hyperplane
intersection.  Candidates coinciding with each other or with kept on-plane
vertices are merged (active sets are united), so cuts through existing
vertices do not duplicate them.

Per-vertex active-halfspace sets are packed into uint64 bitmask words so a
cut's bookkeeping touches O(V) words instead of an O(V x M) boolean matrix;
adjacency is an edge list rebuilt from surviving edges, parent links, and
popcount matches among the new and on-plane vertices.  Degeneracy is handled
by an on-plane tolerance band plus coincidence merging rather than symbolic
perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dcexpr import BoxDomain
from .errors import DimensionTooLarge, EmptyPolytope

_BAND = 1e-9          # on-plane tolerance for active-set bookkeeping
_MERGE = 1e-9         # coincidence threshold for vertex dedup


@dataclass
class Halfspace:
    """normal @ (x, t) <= offset; the last coordinate is the epigraph t."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        self.normal = np.asarray(self.normal, dtype=float)
        self.offset = float(self.offset)
        if not np.max(np.abs(self.normal)) > 0.0:
            raise ValueError("halfspace normal must be nonzero")

    def normalized(self) -> "Halfspace":
        s = float(np.linalg.norm(self.normal))
        return Halfspace(self.normal / s, self.offset / s)


class VertexPolytope:
    """Mutable polytope owned by a single construction run.

    Attributes of interest to callers:
      vertices()        current vertex coordinates, shape (V, d)
      add_cut(hs)       apply a halfspace, return the new-vertex coords H+
      last_keep_mask    bool mask over the pre-cut vertices kept by the last
                        cut (callers remap per-vertex caches with it)
      total_enumerated  cumulative count of vertices ever created
      cap_index         index of the tagged t-cap halfspace (t <= t_hi)
    """

    def __init__(self, normals, offsets, verts, act_words, edges, cap_index=-1):
        self.normals = normals          # (M, d)
        self.offsets = offsets          # (M,)
        self.verts = verts              # (V, d)
        self.act = act_words            # (V, W) uint64 bitmask rows
        self.edges = edges              # (E, 2) int, i < j
        self.cap_index = cap_index
        self.total_enumerated = verts.shape[0]
        self.last_keep_mask = np.ones(verts.shape[0], dtype=bool)

    @property
    def dim(self) -> int:
        return self.verts.shape[1]

    def vertices(self) -> np.ndarray:
        return self.verts.copy()

    def vertex_count(self) -> int:
        return self.verts.shape[0]

    def max_violation(self) -> float:
        """max over vertices and halfspaces of (normal @ v - offset)."""
        if self.verts.size == 0:
            return 0.0
        return float(np.max(self.verts @ self.normals.T - self.offsets))

    def is_active(self, vertex: int, hs_index: int) -> bool:
        word, bit = divmod(hs_index, 64)
        return bool(self.act[vertex, word] >> np.uint64(bit) & np.uint64(1))

    def cap_active_mask(self) -> np.ndarray:
        word, bit = divmod(self.cap_index, 64)
        return (self.act[:, word] >> np.uint64(bit) & np.uint64(1)).astype(bool)

    def active_matrix(self) -> np.ndarray:
        """Active sets as a (V, M) boolean matrix (test/debug view)."""
        m = self.normals.shape[0]
        bits = np.unpackbits(self.act.view(np.uint8), axis=1, bitorder="little")
        return bits[:, :m].astype(bool)

    def _ensure_capacity(self, m_new: int):
        need = (m_new + 63) // 64
        have = self.act.shape[1]
        if need > have:
            grow = max(need, 2 * have)
            self.act = np.hstack([self.act,
                                  np.zeros((self.act.shape[0], grow - have),
                                           dtype=np.uint64)])

    # -- cutting ------------------------------------------------------------

    def add_cut(self, hs: Halfspace) -> np.ndarray:
        hs = hs.normalized()
        d = self.dim
        s = self.verts @ hs.normal - hs.offset
        onplane = np.abs(s) <= _BAND
        viol = s > _BAND
        keep = ~viol
        if not np.any(keep):
            raise EmptyPolytope("cut removed every vertex")

        cut_idx = self.normals.shape[0]
        self.normals = np.vstack([self.normals, hs.normal[None, :]])
        self.offsets = np.append(self.offsets, hs.offset)
        self._ensure_capacity(cut_idx + 1)
        word, bit = divmod(cut_idx, 64)
        bitval = np.uint64(1) << np.uint64(bit)

        if not np.any(viol):
            if np.any(onplane):
                col = self.act[:, word]
                col[onplane] |= bitval
            self.last_keep_mask = np.ones(self.verts.shape[0], dtype=bool)
            return np.zeros((0, d))

        # candidate vertices on cut edges (strict-keeper -> removed)
        e0, e1 = self.edges[:, 0], self.edges[:, 1]
        cut_a = keep[e0] & ~onplane[e0] & viol[e1]
        cut_b = keep[e1] & ~onplane[e1] & viol[e0]
        ku = np.concatenate([e0[cut_a], e1[cut_b]])
        rv = np.concatenate([e1[cut_a], e0[cut_b]])
        tau = (-s[ku]) / (s[rv] - s[ku])
        cand = self.verts[ku] + tau[:, None] * (self.verts[rv] - self.verts[ku])
        cand_act = self.act[ku] & self.act[rv]
        cand_act[:, word] |= bitval
        cand_parent = ku

        old_index = np.flatnonzero(keep)
        remap = -np.ones(self.verts.shape[0], dtype=int)
        remap[old_index] = np.arange(old_index.size)

        verts = self.verts[keep]
        act = self.act[keep]
        onkeep = onplane[keep]
        if np.any(onkeep):
            col = act[:, word]
            col[onkeep] |= bitval

        # merge candidates into kept on-plane vertices or earlier candidates
        plane_idx = np.flatnonzero(onkeep)
        scale = max(1.0, float(np.max(np.abs(verts))) if verts.size else 1.0)
        tol = _MERGE * scale
        if plane_idx.size and cand.shape[0]:
            dist = np.max(np.abs(cand[:, None, :] - verts[plane_idx][None, :, :]),
                          axis=2)
            nearest = np.argmin(dist, axis=1)
            hit = dist[np.arange(cand.shape[0]), nearest] <= tol
            if np.any(hit):
                np.bitwise_or.at(act, plane_idx[nearest[hit]], cand_act[hit])
                cand = cand[~hit]
                cand_act = cand_act[~hit]
                cand_parent = cand_parent[~hit]
        new_coords, new_act, new_parents = [], [], []
        if cand.shape[0]:
            dmat = np.max(np.abs(cand[:, None, :] - cand[None, :, :]), axis=2)
            close = dmat <= tol
            rep = np.full(cand.shape[0], -1, dtype=int)
            for k in range(cand.shape[0]):
                earlier = np.flatnonzero(close[:k, k])
                if earlier.size:
                    r = int(rep[earlier[0]])
                    rep[k] = r
                    new_act[r] |= cand_act[k]
                else:
                    rep[k] = len(new_coords)
                    new_coords.append(cand[k])
                    new_act.append(cand_act[k].copy())
                    new_parents.append(remap[cand_parent[k]])

        n_keep = verts.shape[0]
        n_new = len(new_coords)
        if n_new:
            verts = np.vstack([verts, np.asarray(new_coords)])
            act = np.vstack([act, np.asarray(new_act)])

        # surviving old edges, parent links for new vertices, and pairs among
        # {new, kept-on-plane} vertices recovered from shared active sets
        chunks = []
        ok = keep[e0] & keep[e1]
        if np.any(ok):
            chunks.append(remap[self.edges[ok]])
        if n_new:
            chunks.append(np.column_stack([np.asarray(new_parents, dtype=int),
                                           np.arange(n_keep, n_keep + n_new)]))
        group = np.concatenate([plane_idx, np.arange(n_keep, n_keep + n_new)])
        if group.size > 1:
            ga = act[group]
            shared = np.bitwise_count(
                ga[:, None, :] & ga[None, :, :]).sum(axis=2)
            gi, gj = np.nonzero(np.triu(shared >= d - 1, k=1))
            if gi.size:
                chunks.append(np.column_stack([group[gi], group[gj]]))
        if chunks:
            allp = np.vstack(chunks)
            lo_v = allp.min(axis=1).astype(np.int64)
            hi_v = allp.max(axis=1).astype(np.int64)
            nv = n_keep + n_new
            keys = np.unique(lo_v * np.int64(nv) + hi_v)
            edges = np.column_stack([keys // nv, keys % nv]).astype(int)
        else:
            edges = np.zeros((0, 2), dtype=int)

        self.verts = verts
        self.act = act
        self.edges = edges
        self.total_enumerated += n_new
        self.last_keep_mask = keep
        return verts[n_keep:].copy()


def init_epigraph(box: BoxDomain, t_lo: float, t_hi: float,
                  max_dim: int = 8) -> VertexPolytope:
    """Box x [t_lo, t_hi] with its 2^(n+1) corners and hypercube adjacency.

    The t <= t_hi facet is tagged (cap_index) so the construction loop can
    detect an optimal vertex resting on the artificial cap.
    """
    if t_lo >= t_hi:
        raise ValueError("t_lo must be < t_hi")
    d = box.dimension + 1
    if d > max_dim:
        raise DimensionTooLarge(f"polytope dimension {d} exceeds cap {max_dim}")
    lo = np.append(box.lower, t_lo)
    hi = np.append(box.upper, t_hi)

    normals, offsets = [], []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        normals.append(e.copy()); offsets.append(hi[i])      # x_i <= hi
        e2 = np.zeros(d)
        e2[i] = -1.0
        normals.append(e2); offsets.append(-lo[i])           # -x_i <= -lo
    normals = np.asarray(normals)
    offsets = np.asarray(offsets)
    cap_index = 2 * (d - 1)

    nv = 2 ** d
    bits = (np.arange(nv)[:, None] >> np.arange(d)[None, :]) & 1
    verts = np.where(bits == 1, hi, lo).astype(float)
    act = np.zeros((nv, 4), dtype=np.uint64)     # capacity for 256 halfspaces
    for i in range(d):
        hi_mask = bits[:, i] == 1
        for j, mask in ((2 * i, hi_mask), (2 * i + 1, ~hi_mask)):
            word, bit = divmod(j, 64)
            col = act[:, word]
            col[mask] |= np.uint64(1) << np.uint64(bit)

    edges = []
    for v in range(nv):
        for i in range(d):
            w = v ^ (1 << i)
            if w > v:
                edges.append((v, w))
    return VertexPolytope(normals, offsets, verts, act,
                          np.asarray(edges, dtype=int), cap_index)
