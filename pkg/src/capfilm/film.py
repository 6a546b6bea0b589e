"""The film state: a planar curve network with liquid faces.

An edge is a polyline (chain of point indices).  Liquid faces are given by
boundary cycles of oriented edges; an edge on the boundary of exactly one
liquid face is a wet edge (multiplicity 1), an edge with vacuum on both
sides is collapsed (multiplicity 2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .arrangement import Arrangement, intersecting_pairs
from .geom2d import TOL_GEOM
from .wireframe import WireFrame

Cycle = list[tuple[int, int]]  # (edge id, +1 forward / -1 backward)


class InvalidNetwork(ValueError):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(f"{v.kind}: {v.detail}" for v in violations))


class Violation(NamedTuple):
    kind: str
    detail: str


@dataclass
class EnergyBreakdown:
    boundary_length: float
    collapsed_length: float
    energy_F: float
    area: float
    lambda_estimate: float | None = None

    def as_dict(self) -> dict:
        return {
            "boundary_length": self.boundary_length,
            "collapsed_length": self.collapsed_length,
            "energy_F": self.energy_F,
            "area": self.area,
            "lambda_estimate": self.lambda_estimate,
        }


class Topology:
    """Flattened index arrays used by the kernels (fixed per network)."""

    def __init__(self, net: "FilmNetwork"):
        sa, sb, se = [], [], []
        for e, chain in enumerate(net.edges):
            sa.append(chain[:-1])
            sb.append(chain[1:])
            se.append(np.full(len(chain) - 1, e))
        self.sa = np.ascontiguousarray(np.concatenate(sa) if sa else np.empty(0), dtype=np.intp)
        self.sb = np.ascontiguousarray(np.concatenate(sb) if sb else np.empty(0), dtype=np.intp)
        self.seg_edge = np.concatenate(se).astype(np.intp) if se else np.empty(0, dtype=np.intp)
        uses = np.zeros(len(net.edges), dtype=int)
        for face in net.faces:
            for cyc in face:
                for e, _ in cyc:
                    uses[e] += 1
        self.edge_uses = uses
        self.edge_mult = np.where(uses == 0, 2.0, 1.0)
        self.w = np.ascontiguousarray(self.edge_mult[self.seg_edge], dtype=float)
        loops, nxt, prv = [], [], []
        self.loop_face = []
        off = 0
        for fi, face in enumerate(net.faces):
            for cyc in face:
                idx = net.cycle_points(cyc)
                n = len(idx)
                loops.append(idx)
                r = np.arange(n)
                nxt.append(off + (r + 1) % n)
                prv.append(off + (r - 1) % n)
                self.loop_face.append(fi)
                off += n
        cat = lambda xs: np.ascontiguousarray(np.concatenate(xs) if xs else np.empty(0), dtype=np.intp)
        self.loop, self.nxt, self.prv = cat(loops), cat(nxt), cat(prv)
        self.loops = loops


@dataclass
class FilmNetwork:
    wire: WireFrame
    points: np.ndarray
    anchor: np.ndarray
    edges: list[np.ndarray]
    faces: list[list[Cycle]] = field(default_factory=list)

    def __post_init__(self):
        self.points = np.ascontiguousarray(np.asarray(self.points, dtype=float).reshape(-1, 2))
        self.anchor = np.asarray(self.anchor, dtype=np.intp).reshape(-1)
        self.edges = [np.asarray(c, dtype=np.intp) for c in self.edges]
        self.faces = [[[(int(e), int(d)) for e, d in cyc] for cyc in face] for face in self.faces]
        self._normalise_orientation()

    # -- structure -------------------------------------------------------
    def cycle_points(self, cyc: Cycle) -> np.ndarray:
        out = []
        for e, d in cyc:
            ch = self.edges[e] if d > 0 else self.edges[e][::-1]
            out.append(ch[:-1])
        return np.concatenate(out) if out else np.empty(0, dtype=np.intp)

    def _cycle_closed(self, cyc: Cycle) -> bool:
        ends = []
        for e, d in cyc:
            ch = self.edges[e] if d > 0 else self.edges[e][::-1]
            ends.append((ch[0], ch[-1]))
        return all(ends[k][1] == ends[(k + 1) % len(ends)][0] for k in range(len(ends)))

    def _normalise_orientation(self):
        for fi, face in enumerate(self.faces):
            if not all(c and self._cycle_closed(c) for c in face):
                continue
            a = sum(_loop_area(self.points[self.cycle_points(c)]) for c in face)
            if a < 0:
                self.faces[fi] = [[(e, -d) for e, d in reversed(c)] for c in face]

    @cached_property
    def topo(self) -> Topology:
        return Topology(self)

    def with_points(self, P) -> "FilmNetwork":
        """Same topology, new coordinates (topology cache shared)."""
        new = FilmNetwork.__new__(FilmNetwork)
        new.wire, new.anchor, new.edges, new.faces = self.wire, self.anchor, self.edges, self.faces
        new.points = np.ascontiguousarray(P, dtype=float)
        if "topo" in self.__dict__:
            new.__dict__["topo"] = self.__dict__["topo"]
        return new

    def copy(self) -> "FilmNetwork":
        return self.with_points(self.points.copy())

    @property
    def vertices(self) -> np.ndarray:
        """Point indices that are edge endpoints."""
        if not self.edges:
            return np.empty(0, dtype=np.intp)
        return np.unique(np.concatenate([[c[0], c[-1]] for c in self.edges]))

    def degree(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for c in self.edges:
            for v in (int(c[0]), int(c[-1])):
                deg[v] = deg.get(v, 0) + 1
        return deg

    def edge_multiplicity(self) -> np.ndarray:
        return self.topo.edge_mult

    def liquid_edges(self) -> list[int]:
        return [e for e in range(len(self.edges)) if self.topo.edge_uses[e] == 1]

    def collapsed_edges(self) -> list[int]:
        return [e for e in range(len(self.edges)) if self.topo.edge_uses[e] == 0]

    def edge_faces(self) -> list[tuple[int, int]]:
        """(left_face, right_face) per edge; -1 is vacuum."""
        out = [[-1, -1] for _ in self.edges]
        for fi, face in enumerate(self.faces):
            for cyc in face:
                for e, d in cyc:
                    out[e][0 if d > 0 else 1] = fi
        return [tuple(x) for x in out]

    def segment_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        t = self.topo
        return self.points[t.sa], self.points[t.sb]

    def edge_points(self, e: int) -> np.ndarray:
        return self.points[self.edges[e]]

    def face_loops(self, fi: int) -> list[np.ndarray]:
        return [self.points[self.cycle_points(c)] for c in self.faces[fi]]

    def liquid_polygon(self):
        """Union of the liquid faces as a shapely geometry."""
        from shapely.geometry import Polygon
        from shapely.ops import unary_union

        polys = []
        for fi in range(len(self.faces)):
            loops = self.face_loops(fi)
            outer = max(loops, key=_loop_area)
            holes = [l for l in loops if l is not outer]
            polys.append(Polygon(outer, holes))
        return unary_union(polys) if polys else Polygon()


def _loop_area(pts) -> float:
    pts = np.asarray(pts)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


# -- energy -------------------------------------------------------------------

def seg_lengths(net: FilmNetwork) -> np.ndarray:
    d = net.points[net.topo.sb] - net.points[net.topo.sa]
    return np.hypot(d[:, 0], d[:, 1])


def area(net: FilmNetwork) -> float:
    t = net.topo
    if len(t.loop) == 0:
        return 0.0
    return kernels.area(net.points, t.loop, t.nxt, t.prv)


def energy(net: FilmNetwork, check: bool = True, with_lambda: bool = True) -> EnergyBreakdown:
    """Wet length, collapsed length, relaxed energy and area."""
    if check:
        bad = validate(net)
        if bad:
            raise InvalidNetwork(bad)
    L = seg_lengths(net)
    w = net.topo.w
    wet = float(L[w == 1.0].sum())
    col = float(L[w == 2.0].sum())
    lam = None
    if with_lambda:
        from .relaxation import estimate_lambda

        est = estimate_lambda(net)
        lam = None if est is None else est.value
    return EnergyBreakdown(wet, col, wet + 2.0 * col, area(net), lam)


# -- validation -----------------------------------------------------------------

def validate(net: FilmNetwork, tol: float = TOL_GEOM) -> list[Violation]:
    """Report every violated structural invariant (never raises)."""
    out: list[Violation] = []
    P = net.points
    wire = net.wire
    if not np.all(np.isfinite(P)):
        out.append(Violation("NonFinite", "non-finite coordinates"))
        return out
    for e, ch in enumerate(net.edges):
        if len(ch) < 2:
            out.append(Violation("DegenerateEdge", f"edge {e} has fewer than 2 points"))
    if out:
        return out
    # anchors
    for i in np.nonzero(net.anchor >= 0)[0]:
        k = net.anchor[i]
        if k >= wire.m:
            out.append(Violation("AnchorIndex", f"point {i} anchored to missing obstacle {k}"))
            continue
        r = np.hypot(*(P[i] - wire.obstacles[k]))
        if abs(r - wire.delta) > max(tol, 1e-12 + 1e3 * tol * wire.delta):
            out.append(Violation("AnchorOffCircle", f"point {i} at distance {r:.3g} from obstacle {k}"))
    inside = wire.inside(P, tol=max(tol, 1e3 * tol * wire.delta))
    for i in np.nonzero(inside)[0]:
        out.append(Violation("VertexInWire", f"point {i} inside the wire"))
    p0, p1 = net.segment_endpoints()
    L = np.hypot(*(p1 - p0).T)
    for s in np.nonzero(L <= tol)[0]:
        out.append(Violation("DegenerateSegment", f"segment {s} of edge {net.topo.seg_edge[s]} has zero length"))
    # segments entering a disk between their endpoints
    if not inside.any():
        for k, c in enumerate(wire.obstacles):
            u = p1 - p0
            t = np.clip(((c - p0) * u).sum(1) / np.maximum((u * u).sum(1), 1e-300), 0, 1)
            dist = np.hypot(*(p0 + t[:, None] * u - c).T)
            for s in np.nonzero(dist < wire.delta - max(tol, 1e3 * tol * wire.delta))[0]:
                out.append(Violation("EdgeInWire", f"segment {s} passes through wire disk {k}"))
    # crossings between non-adjacent segments
    pairs, _, _ = intersecting_pairs(p0, p1, tol, skip_shared_endpoints=True)
    for i, j in pairs:
        out.append(Violation("EdgeCrossing",
                             f"segments {i} (edge {net.topo.seg_edge[i]}) and {j} (edge {net.topo.seg_edge[j]}) intersect"))
    # faces
    for fi, face in enumerate(net.faces):
        for cyc in face:
            if not cyc or not net._cycle_closed(cyc):
                out.append(Violation("FaceNotClosed", f"liquid face {fi} has an open boundary cycle"))
    uses = np.zeros(len(net.edges), dtype=int)
    for face in net.faces:
        for cyc in face:
            for e, _ in cyc:
                if 0 <= e < len(net.edges):
                    uses[e] += 1
    for e in np.nonzero(uses >= 2)[0]:
        out.append(Violation("LiquidBothSides", f"edge {e} has liquid on both sides"))
    return out


# -- refinement ------------------------------------------------------------------

def refine(net: FilmNetwork, max_seg_len: float) -> FilmNetwork:
    """Insert points on straight sub-segments so none exceeds ``max_seg_len``."""
    P = [p for p in net.points]
    anchor = list(net.anchor)
    edges = []
    for ch in net.edges:
        new = [int(ch[0])]
        for a, b in zip(ch[:-1], ch[1:]):
            pa, pb = net.points[a], net.points[b]
            L = float(np.hypot(*(pb - pa)))
            k = int(np.ceil(L / max_seg_len - 1e-12))
            for j in range(1, k):
                P.append(pa + (pb - pa) * (j / k))
                anchor.append(-1)
                new.append(len(P) - 1)
            new.append(int(b))
        edges.append(np.array(new, dtype=np.intp))
    return FilmNetwork(net.wire, np.array(P), np.array(anchor), edges, net.faces)


# -- construction from raw geometry ---------------------------------------------

def from_polylines(wire: WireFrame, polylines: Sequence, liquid: Callable | None = None,
                   tol: float = TOL_GEOM) -> FilmNetwork:
    """Build a network from arbitrary polylines.

    Intersections become vertices; a bounded face is liquid when
    ``liquid(point)`` is true at a probe point inside it.
    """
    p0, p1 = [], []
    for pl in polylines:
        pl = np.asarray(pl, dtype=float).reshape(-1, 2)
        if len(pl) >= 2:
            p0.append(pl[:-1])
            p1.append(pl[1:])
    if not p0:
        return FilmNetwork(wire, np.empty((0, 2)), np.empty(0), [], [])
    arr = Arrangement(np.vstack(p0), np.vstack(p1), tol=tol)
    V = arr.vertices
    anchor = np.array([wire.anchor_of(v, tol=max(tol, 1e-7 * wire.delta)) for v in V], dtype=np.intp)
    nv = len(V)
    deg = np.bincount(arr.edges.ravel(), minlength=nv)
    brk = (deg != 2) | (anchor >= 0)
    # chains along half-edges; he -> (chain, dir)
    ne = len(arr.edges)
    he_chain = -np.ones(2 * ne, dtype=np.intp)
    he_dir = np.zeros(2 * ne, dtype=np.intp)
    out_he: list[list[int]] = [[] for _ in range(nv)]
    for h in range(2 * ne):
        out_he[arr.he_tail[h]].append(h)
    chains = []

    def walk(h0):
        seq = [h0]
        h = h0
        while not brk[arr.he_head[h]]:
            v = arr.he_head[h]
            nxt = [g for g in out_he[v] if g != (h ^ 1)]
            h = nxt[0]
            if h == h0:
                break
            seq.append(h)
        return seq

    for h0 in range(2 * ne):
        if he_chain[h0] >= 0 or not brk[arr.he_tail[h0]]:
            continue
        seq = walk(h0)
        cid = len(chains)
        chains.append([int(arr.he_tail[seq[0]])] + [int(arr.he_head[h]) for h in seq])
        for h in seq:
            he_chain[h], he_dir[h] = cid, 1
            he_chain[h ^ 1], he_dir[h ^ 1] = cid, -1
    # closed loops without break points
    for h0 in range(2 * ne):
        if he_chain[h0] >= 0:
            continue
        seq = walk_loop(arr, h0, out_he)
        cid = len(chains)
        chains.append([int(arr.he_tail[seq[0]])] + [int(arr.he_head[h]) for h in seq])
        for h in seq:
            he_chain[h], he_dir[h] = cid, 1
            he_chain[h ^ 1], he_dir[h ^ 1] = cid, -1

    def he_cycle_to_chain_cycle(hs):
        hs = list(hs)
        start = next((k for k, h in enumerate(hs) if brk[arr.he_tail[h]]), None)
        if start is None:
            return [(int(he_chain[hs[0]]), int(he_dir[hs[0]]))]
        hs = hs[start:] + hs[:start]
        cyc = []
        for h in hs:
            if brk[arr.he_tail[h]]:
                cyc.append((int(he_chain[h]), int(he_dir[h])))
        return cyc

    faces = []
    if liquid is not None:
        for f in range(1, len(arr.faces)):
            probe = arr.face_probe(f)
            if not liquid(probe):
                continue
            face = arr.faces[f]
            cycles = [he_cycle_to_chain_cycle(face.outer)]
            for k in face.holes:
                cycles.append(he_cycle_to_chain_cycle(arr.cycles[arr.comp_outer[k]]))
            faces.append(cycles)
    return FilmNetwork(wire, V, anchor, [np.array(c) for c in chains], faces)


def walk_loop(arr: Arrangement, h0: int, out_he) -> list[int]:
    seq = [h0]
    h = h0
    while True:
        v = arr.he_head[h]
        nxt = [g for g in out_he[v] if g != (h ^ 1)]
        h = nxt[0]
        if h == h0:
            return seq
        seq.append(h)
