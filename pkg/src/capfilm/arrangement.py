"""Planar straight-line arrangements with half-edge face extraction.

Segments are split at every mutual intersection, coincident endpoints are
merged, and faces are traced with the usual ``next = twin, one step
clockwise`` rule so that every face lies to the left of its half-edges.
Bounded faces come out as counterclockwise cycles; the outer walk of each
connected component comes out clockwise (or with zero area for trees) and
is attached as a hole to the face that contains the component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geom2d import TOL_GEOM, ray_crossing_parity


class ArrangementDegenerate(RuntimeError):
    """Face extraction failed (inconsistent half-edge structure)."""


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def candidate_pairs(p0: np.ndarray, p1: np.ndarray, tol: float) -> np.ndarray:
    """Index pairs (i < j) of segments whose bounding boxes overlap."""
    n = len(p0)
    if n < 2:
        return np.empty((0, 2), dtype=np.intp)
    lo = np.minimum(p0, p1) - tol
    hi = np.maximum(p0, p1) + tol
    order = np.argsort(lo[:, 0], kind="stable")
    out = []
    lo_s, hi_s = lo[order], hi[order]
    # sweep on x; inner test vectorised
    for k in range(n):
        j_end = np.searchsorted(lo_s[:, 0], hi_s[k, 0], side="right")
        if j_end <= k + 1:
            continue
        js = np.arange(k + 1, j_end)
        ok = (lo_s[js, 1] <= hi_s[k, 1]) & (hi_s[js, 1] >= lo_s[k, 1])
        if ok.any():
            a = order[k]
            b = order[js[ok]]
            out.append(np.column_stack([np.minimum(a, b), np.maximum(a, b)]))
    if not out:
        return np.empty((0, 2), dtype=np.intp)
    return np.vstack(out)


def intersecting_pairs(p0, p1, tol=TOL_GEOM, skip_shared_endpoints=True):
    """Pairs of segments that cross or touch, with the crossing parameters.

    Returns ``(pairs, t_i, t_j)`` where ``t_i`` is the parameter along
    segment ``i`` of the contact point (NaN for collinear overlaps).
    Pairs that only share an endpoint are dropped when
    ``skip_shared_endpoints``.
    """
    pairs = candidate_pairs(p0, p1, tol)
    if len(pairs) == 0:
        return pairs, np.empty(0), np.empty(0)
    i, j = pairs[:, 0], pairs[:, 1]
    a, b, c, d = p0[i], p1[i], p0[j], p1[j]
    o1 = _orient(a[:, 0], a[:, 1], b[:, 0], b[:, 1], c[:, 0], c[:, 1])
    o2 = _orient(a[:, 0], a[:, 1], b[:, 0], b[:, 1], d[:, 0], d[:, 1])
    o3 = _orient(c[:, 0], c[:, 1], d[:, 0], d[:, 1], a[:, 0], a[:, 1])
    o4 = _orient(c[:, 0], c[:, 1], d[:, 0], d[:, 1], b[:, 0], b[:, 1])
    li = np.hypot(*(b - a).T)
    lj = np.hypot(*(d - c).T)
    zi = tol * li  # distance tolerance, independent of segment scale
    zj = tol * lj
    s1 = np.where(np.abs(o1) <= zi, 0, np.sign(o1))
    s2 = np.where(np.abs(o2) <= zi, 0, np.sign(o2))
    s3 = np.where(np.abs(o3) <= zj, 0, np.sign(o3))
    s4 = np.where(np.abs(o4) <= zj, 0, np.sign(o4))
    hit = (s1 * s2 <= 0) & (s3 * s4 <= 0)
    collinear = (s1 == 0) & (s2 == 0) & (s3 == 0) & (s4 == 0)
    if skip_shared_endpoints:
        shared = np.zeros(len(pairs), dtype=bool)
        for p, q in ((a, c), (a, d), (b, c), (b, d)):
            shared |= np.hypot(*(p - q).T) <= tol
        # a shared endpoint is harmless unless the segments also overlap
        hit &= ~shared | collinear
    # collinear but disjoint along the line
    if collinear.any():
        u = b - a
        un = np.where(li[:, None] > 0, u / np.maximum(li, 1e-300)[:, None], 0)
        ta = np.zeros(len(pairs))
        tb = li
        tc = ((c - a) * un).sum(1)
        td = ((d - a) * un).sum(1)
        lo = np.maximum(np.minimum(ta, tb), np.minimum(tc, td))
        hi = np.minimum(np.maximum(ta, tb), np.maximum(tc, td))
        overlap = hi > lo + tol
        if skip_shared_endpoints:
            hit &= ~collinear | overlap
        else:
            hit &= ~collinear | (hi >= lo - tol)
    pairs = pairs[hit]
    a, b, c, d = a[hit], b[hit], c[hit], d[hit]
    den = (b[:, 0] - a[:, 0]) * (d[:, 1] - c[:, 1]) - (b[:, 1] - a[:, 1]) * (d[:, 0] - c[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        ti = ((c[:, 0] - a[:, 0]) * (d[:, 1] - c[:, 1]) - (c[:, 1] - a[:, 1]) * (d[:, 0] - c[:, 0])) / den
        tj = ((c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]) - (c[:, 1] - a[:, 1]) * (b[:, 0] - a[:, 0])) / den
    par = np.abs(den) <= 1e-14 * np.maximum(li[hit] * lj[hit], 1e-300)
    ti[par] = np.nan
    tj[par] = np.nan
    return pairs, np.clip(ti, 0, 1), np.clip(tj, 0, 1)


def _project_param(p, a, b):
    u = b - a
    L2 = float(u @ u)
    if L2 == 0:
        return 0.0
    return float((p - a) @ u) / L2


def split_segments(p0: np.ndarray, p1: np.ndarray, tol=TOL_GEOM):
    """Split segments at mutual intersections.

    Returns ``(q0, q1, origin)`` with the sub-segments and the index of the
    input segment each came from.
    """
    p0 = np.asarray(p0, dtype=float).reshape(-1, 2)
    p1 = np.asarray(p1, dtype=float).reshape(-1, 2)
    pairs, ti, tj = intersecting_pairs(p0, p1, tol, skip_shared_endpoints=True)
    cuts: dict[int, list[float]] = {}
    for (i, j), a_, b_ in zip(pairs, ti, tj):
        if np.isnan(a_):
            # collinear overlap: split each at the other's endpoints
            for s, o in ((i, j), (j, i)):
                for q in (p0[o], p1[o]):
                    t = _project_param(q, p0[s], p1[s])
                    if 0 < t < 1:
                        cuts.setdefault(s, []).append(t)
        else:
            cuts.setdefault(int(i), []).append(float(a_))
            cuts.setdefault(int(j), []).append(float(b_))
    q0, q1, origin = [], [], []
    for s in range(len(p0)):
        ts = sorted(set([0.0, 1.0] + [t for t in cuts.get(s, []) if 0.0 < t < 1.0]))
        pts = p0[s][None, :] + np.asarray(ts)[:, None] * (p1[s] - p0[s])[None, :]
        for k in range(len(ts) - 1):
            q0.append(pts[k])
            q1.append(pts[k + 1])
            origin.append(s)
    if not q0:
        return np.empty((0, 2)), np.empty((0, 2)), np.empty(0, dtype=np.intp)
    return np.array(q0), np.array(q1), np.array(origin, dtype=np.intp)


def merge_points(pts: np.ndarray, tol=TOL_GEOM):
    """Cluster points closer than ``tol``; returns (unique_pts, labels)."""
    n = len(pts)
    parent = np.arange(n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if n:
        for i, j in cKDTree(pts).query_pairs(tol):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(n)], dtype=np.intp)
    uniq, labels = np.unique(roots, return_inverse=True)
    return pts[uniq], labels


@dataclass
class Face:
    """A face of the arrangement.

    ``outer`` is the counterclockwise boundary cycle (list of half-edge
    ids), empty for the unbounded face.  ``holes`` lists component ids
    whose outer walk bounds this face from inside, ``punctures`` the
    isolated marked points inside it.
    """

    outer: list[int]
    holes: list[int] = field(default_factory=list)
    punctures: list[int] = field(default_factory=list)
    area: float = float("inf")


class Arrangement:
    """Half-edge structure of a set of segments plus marked points.

    Parameters
    ----------
    p0, p1 : (S, 2) arrays
        Segment endpoints. Intersections are resolved here.
    marks : (M, 2) array, optional
        Points that are not part of the segment set (punctures of the
        plane).  Marks that coincide with an arrangement vertex are
        recorded in ``mark_vertex``; others are assigned to a face.
    """

    def __init__(self, p0, p1, marks=None, tol=TOL_GEOM):
        self.tol = tol
        q0, q1, origin = split_segments(p0, p1, tol)
        allpts = np.vstack([q0, q1]) if len(q0) else np.empty((0, 2))
        marks = np.empty((0, 2)) if marks is None else np.asarray(marks, dtype=float).reshape(-1, 2)
        verts, labels = merge_points(np.vstack([allpts, marks]), tol)
        ns = len(q0)
        va, vb = labels[:ns], labels[ns:2 * ns]
        mark_labels = labels[2 * ns:]
        self.vertices = verts

        keep = va != vb
        va, vb, origin = va[keep], vb[keep], origin[keep]
        key = np.column_stack([np.minimum(va, vb), np.maximum(va, vb)])
        key, first = np.unique(key, axis=0, return_index=True)
        self.edge_origin = origin[first]
        self.edges = key
        ne = len(key)
        # half-edge 2e: u->v, 2e+1: v->u
        self.he_tail = np.empty(2 * ne, dtype=np.intp)
        self.he_head = np.empty(2 * ne, dtype=np.intp)
        self.he_tail[0::2], self.he_head[0::2] = key[:, 0], key[:, 1]
        self.he_tail[1::2], self.he_head[1::2] = key[:, 1], key[:, 0]

        used = np.zeros(len(verts), dtype=bool)
        used[self.he_tail] = True
        self.mark_vertex = [int(m) if used[m] else -1 for m in mark_labels]

        self._build_next()
        self._trace()
        self._components()
        self._faces(marks)

    # -- construction ---------------------------------------------------
    def _build_next(self):
        V = self.vertices
        d = V[self.he_head] - V[self.he_tail]
        ang = np.arctan2(d[:, 1], d[:, 0])
        order = np.lexsort((ang, self.he_tail))
        tails = self.he_tail[order]
        starts = np.searchsorted(tails, np.arange(len(V)))
        ends = np.searchsorted(tails, np.arange(len(V)), side="right")
        pos = np.empty(len(order), dtype=np.intp)
        pos[order] = np.arange(len(order))
        nxt = np.empty(len(order), dtype=np.intp)
        for h in range(len(order)):
            twin = h ^ 1
            v = self.he_tail[twin]
            s, e = starts[v], ends[v]
            k = pos[twin] - 1
            if k < s:
                k = e - 1
            nxt[h] = order[k]
        self.he_next = nxt

    def _trace(self):
        nh = len(self.he_next)
        cyc = -np.ones(nh, dtype=np.intp)
        cycles = []
        for h in range(nh):
            if cyc[h] >= 0:
                continue
            c = []
            x = h
            while cyc[x] < 0:
                cyc[x] = len(cycles)
                c.append(x)
                x = self.he_next[x]
                if len(c) > nh:
                    raise ArrangementDegenerate("runaway face cycle")
            if x != h:
                raise ArrangementDegenerate("face cycle did not close")
            cycles.append(c)
        self.cycles = cycles
        self.he_cycle = cyc
        V = self.vertices
        areas = []
        for c in cycles:
            t = V[self.he_tail[c]]
            h_ = V[self.he_head[c]]
            areas.append(0.5 * float(np.sum(t[:, 0] * h_[:, 1] - h_[:, 0] * t[:, 1])))
        self.cycle_area = np.array(areas)

    def _components(self):
        nv = len(self.vertices)
        parent = np.arange(nv)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
        comp_of_v = np.array([find(i) for i in range(nv)])
        roots = sorted({comp_of_v[self.he_tail[c[0]]] for c in self.cycles})
        rid = {r: k for k, r in enumerate(roots)}
        self.cycle_comp = np.array([rid[comp_of_v[self.he_tail[c[0]]]] for c in self.cycles], dtype=np.intp)
        self.vertex_comp = np.array([rid.get(comp_of_v[i], -1) for i in range(nv)], dtype=np.intp)
        ncomp = len(roots)
        self.comp_outer = np.empty(ncomp, dtype=np.intp)
        for k in range(ncomp):
            idx = np.nonzero(self.cycle_comp == k)[0]
            self.comp_outer[k] = idx[np.argmin(self.cycle_area[idx])]

    def cycle_polygon(self, c: int) -> np.ndarray:
        return self.vertices[self.he_tail[self.cycles[c]]]

    def _faces(self, marks):
        outer_set = set(self.comp_outer.tolist())
        faces = [Face(outer=[])]
        self.cycle_face = -np.ones(len(self.cycles), dtype=np.intp)
        bounded = [c for c in range(len(self.cycles)) if c not in outer_set]
        for c in bounded:
            self.cycle_face[c] = len(faces)
            faces.append(Face(outer=list(self.cycles[c]), area=float(self.cycle_area[c])))
        self.faces = faces
        # faces sorted by area for smallest-container queries
        self._bounded_by_area = sorted(bounded, key=lambda c: self.cycle_area[c])
        self._polys = {c: self.cycle_polygon(c) for c in bounded}
        for k, oc in enumerate(self.comp_outer):
            self.cycle_face[oc] = -1
            probe = self.vertices[self.he_tail[self.cycles[oc][0]]]
            f = self._locate(probe, exclude_comp=k)
            faces[f].holes.append(k)
        self.mark_face = []
        for m, pt in enumerate(marks):
            if self.mark_vertex[m] >= 0:
                self.mark_face.append(-1)
                continue
            f = self._locate(pt)
            faces[f].punctures.append(m)
            self.mark_face.append(f)

    def _locate(self, p, exclude_comp=None) -> int:
        for c in self._bounded_by_area:
            if exclude_comp is not None and self.cycle_comp[c] == exclude_comp:
                continue
            if ray_crossing_parity(self._polys[c], p) == 1:
                return int(self.cycle_face[c])
        return 0

    # -- queries ----------------------------------------------------------
    def locate(self, p) -> int:
        """Face id containing point ``p`` (0 is the unbounded face)."""
        return self._locate(np.asarray(p, dtype=float))

    def face_probe(self, f: int, frac: float = 1e-4) -> np.ndarray:
        """A point just inside face ``f`` (to the left of a boundary edge)."""
        face = self.faces[f]
        if f == 0:
            lo = self.vertices.min(0) if len(self.vertices) else np.zeros(2)
            return lo - 1.0
        V = self.vertices
        # choose the longest boundary half-edge for robustness
        hs = face.outer
        L = [np.hypot(*(V[self.he_head[h]] - V[self.he_tail[h]])) for h in hs]
        h = hs[int(np.argmax(L))]
        a, b = V[self.he_tail[h]], V[self.he_head[h]]
        u = b - a
        n = np.array([-u[1], u[0]]) / np.hypot(*u)
        return 0.5 * (a + b) + n * max(frac * np.hypot(*u), 10 * self.tol)

    def component_vertices(self, k: int) -> np.ndarray:
        return np.nonzero(self.vertex_comp == k)[0]

    def component_edges(self, k: int) -> np.ndarray:
        return np.nonzero(self.vertex_comp[self.edges[:, 0]] == k)[0]
