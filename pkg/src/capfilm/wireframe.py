"""Wire frames, spanning classes and the spanning test.

The wire ``W`` is a union of closed disks of radius ``delta`` around the
obstacle points.  A loop class is encoded by its mod-2 winding pattern
around the obstacles.  A network ``K`` spans a class when no closed curve
in the complement of ``K`` and ``W`` has that winding pattern.

The test reduces each disk to its centre: edges that end on a disk are
extended radially to the centre ("spokes"), which leaves the homotopy type
of the complement unchanged.  In the resulting planar graph every face is
an open connected region whose first homology is generated by loops around
its holes (components of the graph nested inside it, plus isolated
centres), so the parities realisable inside a face are the F2-span of the
hole labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arrangement import Arrangement, ArrangementDegenerate
from .geom2d import TOL_GEOM, point_segment_distance, ray_crossing_parity, segment_distance

__all__ = [
    "WireFrame", "SpanningClass", "RegionGraph", "SpanningResult",
    "build_region_graph", "achievable_parities", "is_spanning",
    "ArrangementDegenerate", "f2_reduce", "f2_in_span",
]


@dataclass(frozen=True)
class WireFrame:
    obstacles: np.ndarray
    delta: float

    def __post_init__(self):
        obs = np.asarray(self.obstacles, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "obstacles", obs)
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if len(obs) < 1:
            raise ValueError("wire frame needs at least one obstacle")
        if not np.all(np.isfinite(obs)):
            raise ValueError("obstacle coordinates must be finite")
        if len(obs) > 1:
            d = np.hypot(*(obs[:, None, :] - obs[None, :, :]).transpose(2, 0, 1))
            d[np.diag_indices(len(obs))] = np.inf
            if d.min() <= 2 * self.delta:
                raise ValueError("wire disks must be pairwise disjoint")

    @property
    def m(self) -> int:
        return len(self.obstacles)

    def diameter(self) -> float:
        span = np.ptp(self.obstacles, axis=0)
        return float(np.hypot(*span) + 2 * self.delta)

    def anchor_of(self, p, tol=TOL_GEOM) -> int:
        """Index of the obstacle whose circle carries ``p``, or -1."""
        d = np.hypot(*(self.obstacles - np.asarray(p, dtype=float)).T)
        k = int(np.argmin(d))
        return k if abs(d[k] - self.delta) <= tol else -1

    def project(self, p, k: int) -> np.ndarray:
        c = self.obstacles[k]
        v = np.asarray(p, dtype=float) - c
        return c + self.delta * v / np.hypot(*v)

    def inside(self, pts, tol=TOL_GEOM) -> np.ndarray:
        """Mask of points strictly inside some wire disk (beyond ``tol``)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        d = np.hypot(*(pts[:, None, :] - self.obstacles[None, :, :]).transpose(2, 0, 1))
        return (d < self.delta - tol).any(axis=1)


@dataclass(frozen=True)
class SpanningClass:
    generators: tuple[tuple[int, ...], ...]
    representative_loops: tuple = ()

    def __post_init__(self):
        gens = tuple(tuple(int(b) & 1 for b in g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ValueError("spanning class needs at least one generator")
        if len({len(g) for g in gens}) != 1:
            raise ValueError("generators must have equal length")
        if any(not any(g) for g in gens):
            raise ValueError("generators: zero vector")
        if len(set(gens)) != len(gens):
            raise ValueError("generators must be pairwise distinct")

    @property
    def m(self) -> int:
        return len(self.generators[0])

    @classmethod
    def singletons(cls, m: int) -> "SpanningClass":
        return cls(tuple(tuple(int(i == k) for i in range(m)) for k in range(m)))


# -- F2 linear algebra on bitmasks ---------------------------------------

def _to_mask(v: Sequence[int]) -> int:
    return sum(1 << i for i, b in enumerate(v) if b)


def _to_vec(mask: int, m: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(m))


def f2_reduce(vectors, m: int) -> list[tuple[int, ...]]:
    """Row-reduced basis of the F2-span of ``vectors``."""
    basis: dict[int, int] = {}
    for v in vectors:
        x = _to_mask(v)
        while x:
            hb = x.bit_length() - 1
            if hb in basis:
                x ^= basis[hb]
            else:
                basis[hb] = x
                break
    return [_to_vec(basis[k], m) for k in sorted(basis, reverse=True)]


def f2_solve(target, vectors) -> list[int] | None:
    """Indices of ``vectors`` summing to ``target`` over F2, or None."""
    # basis entries carry the set of original indices they combine
    basis: dict[int, tuple[int, int]] = {}
    for i, v in enumerate(vectors):
        x, used = _to_mask(v), 1 << i
        while x:
            hb = x.bit_length() - 1
            if hb in basis:
                bx, bu = basis[hb]
                x ^= bx
                used ^= bu
            else:
                basis[hb] = (x, used)
                break
    t, used = _to_mask(target), 0
    while t:
        hb = t.bit_length() - 1
        if hb not in basis:
            return None
        bx, bu = basis[hb]
        t ^= bx
        used ^= bu
    return [i for i in range(len(vectors)) if (used >> i) & 1]


def f2_in_span(target, basis) -> bool:
    return f2_solve(target, basis) is not None


# -- region graph -----------------------------------------------------------

@dataclass
class RegionGraph:
    """Faces of the complement and the winding labels of their holes.

    ``hole_labels[f]`` lists parity vectors of loops around each hole of
    face ``f``; ``hole_sources[f]`` says what each hole is: ``("comp", k)``
    for a connected piece of the network, ``("disk", i)`` for a free wire
    disk.
    """

    arrangement: Arrangement | None
    representatives: list[np.ndarray]
    hole_labels: list[list[tuple[int, ...]]]
    hole_sources: list[list[tuple[str, int]]]
    outer_face: int = 0
    m: int = 0
    comp_disks: dict[int, list[int]] = field(default_factory=dict)

    @property
    def n_faces(self) -> int:
        return len(self.hole_labels)


def _segments_of(network) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(network, "segment_endpoints"):
        return network.segment_endpoints()
    if network is None:
        return np.empty((0, 2)), np.empty((0, 2))
    p0, p1 = network
    return np.asarray(p0, dtype=float).reshape(-1, 2), np.asarray(p1, dtype=float).reshape(-1, 2)


def build_region_graph(network, wire: WireFrame, tol: float = TOL_GEOM) -> RegionGraph:
    """Faces of the plane minus (network and wire), with hole labels."""
    p0, p1 = _segments_of(network)
    m = wire.m
    spokes0, spokes1 = [], []
    if len(p0):
        ends = np.vstack([p0, p1])
        d = np.hypot(*(ends[:, None, :] - wire.obstacles[None]).transpose(2, 0, 1))
        k = np.argmin(d, axis=1)
        on = np.abs(d[np.arange(len(ends)), k] - wire.delta) <= max(tol, 1e3 * tol * wire.delta)
        for e in np.nonzero(on)[0]:
            spokes0.append(ends[e])
            spokes1.append(wire.obstacles[k[e]])
    if spokes0:
        q0 = np.vstack([p0, np.array(spokes0)])
        q1 = np.vstack([p1, np.array(spokes1)])
    else:
        q0, q1 = p0, p1
    try:
        arr = Arrangement(q0, q1, marks=wire.obstacles, tol=tol)
    except ArrangementDegenerate:
        raise
    except Exception as exc:  # pragma: no cover - numerical failure surfaced uniformly
        raise ArrangementDegenerate(str(exc)) from exc

    centers = wire.obstacles
    comp_disks: dict[int, list[int]] = {}
    labels: list[list[tuple[int, ...]]] = []
    sources: list[list[tuple[str, int]]] = []
    for k in range(len(arr.comp_outer)):
        comp_disks[k] = []
    for i, v in enumerate(arr.mark_vertex):
        if v >= 0:
            comp_disks[int(arr.vertex_comp[v])].append(i)
    for f, face in enumerate(arr.faces):
        lab, src = [], []
        for k in face.holes:
            poly = arr.cycle_polygon(arr.comp_outer[k])
            bits = [0] * m
            for i in range(m):
                if i in comp_disks[k]:
                    bits[i] = 1
                elif ray_crossing_parity(poly, centers[i]) == 1:
                    bits[i] = 1
            lab.append(tuple(bits))
            src.append(("comp", k))
        for i in face.punctures:
            lab.append(tuple(int(j == i) for j in range(m)))
            src.append(("disk", i))
        labels.append(lab)
        sources.append(src)
    reps = [arr.face_probe(f) for f in range(len(arr.faces))]
    return RegionGraph(arr, reps, labels, sources, 0, m, comp_disks)


def achievable_parities(graph: RegionGraph) -> list[list[tuple[int, ...]]]:
    """Per-face F2 bases of realisable winding patterns.

    A loop lives in one face, so the realisable set overall is the union of
    these subspaces (not, in general, a subspace itself).
    """
    return [f2_reduce(lab, graph.m) for lab in graph.hole_labels]


@dataclass
class SpanningResult:
    spanning: bool
    violated: tuple[int, ...] | None = None
    face: int | None = None
    witness: list[np.ndarray] = field(default_factory=list)
    clearance: float = float("inf")

    def __bool__(self):
        return self.spanning


def network_clearance(network, wire: WireFrame) -> float:
    """Smallest gap between non-touching pieces of the network and wire."""
    p0, p1 = _segments_of(network)
    best = np.inf
    segs = list(zip(map(tuple, p0), map(tuple, p1)))
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            d = segment_distance(segs[i], segs[j])
            if d > TOL_GEOM:
                best = min(best, d)
    for a, b in segs:
        for c in wire.obstacles:
            d = point_segment_distance(c, a, b) - wire.delta
            if d > TOL_GEOM:
                best = min(best, d)
    return float(best)


def _witness(graph: RegionGraph, face: int, generator, wire: WireFrame, network) -> list[np.ndarray]:
    from shapely.geometry import LineString, Point
    from shapely.ops import unary_union

    idx = f2_solve(generator, graph.hole_labels[face])
    if idx is None:
        return []
    arr = graph.arrangement
    p0, p1 = _segments_of(network)
    scale = max(wire.diameter(), 1.0)
    clr = network_clearance(network, wire) if len(p0) else np.inf
    d = min(0.25 * clr, 0.25 * wire.delta, 1e-2 * scale)
    loops = []
    for i in idx:
        kind, k = graph.hole_sources[face][i]
        if kind == "disk":
            geom = Point(wire.obstacles[k]).buffer(wire.delta + d, quad_segs=64)
        else:
            parts = [Point(wire.obstacles[j]).buffer(wire.delta, quad_segs=64) for j in graph.comp_disks[k]]
            V = arr.vertices
            for e in arr.component_edges(k):
                u, v = arr.edges[e]
                parts.append(LineString([V[u], V[v]]))
            # include everything nested inside the component's outer walk
            geom = unary_union(parts).buffer(d, quad_segs=16)
        ext = np.asarray(geom.exterior.coords) if hasattr(geom, "exterior") else np.asarray(geom.geoms[0].exterior.coords)
        loops.append(ext)
    return loops


def is_spanning(network, wire: WireFrame, cls: SpanningClass, want_witness: bool = True) -> SpanningResult:
    """Decide whether ``network`` meets every loop of the class."""
    if cls.m != wire.m:
        raise ValueError("spanning class and wire frame disagree on obstacle count")
    graph = build_region_graph(network, wire)
    bases = achievable_parities(graph)
    for g in cls.generators:
        for f, basis in enumerate(bases):
            if f2_in_span(g, basis):
                wit = _witness(graph, f, g, wire, network) if want_witness else []
                return SpanningResult(False, g, f, wit)
    return SpanningResult(True)
