"""Initial film networks built from a Steiner-type skeleton.

A skeleton is a tree (or forest) whose nodes are wire disks or free
junction points.  A template wets some of its junctions (each becomes a
small curvilinear triangle whose corners carry the three legs) and some of
its disk-to-disk edges (each becomes a two-arc lens pinned to both disks).
Everything else is collapsed.  The same skeleton with nothing wet is the
Plateau reference used for the value of ``ell``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .film import FilmNetwork
from .wireframe import WireFrame

# area of the tangent-arc triangle per squared tangent length
C1 = 3.0 * (math.sqrt(3.0) - math.pi / 2.0)
# length saved per unit tangent length when a Y junction is wetted
C2 = 6.0 - math.sqrt(3.0) * math.pi

ARC_SEGMENTS = 32


@dataclass
class Node:
    obstacle: int | None = None
    position: tuple[float, float] | None = None

    @property
    def is_terminal(self) -> bool:
        return self.obstacle is not None


@dataclass
class Template:
    """Skeleton graph plus the parts of it that carry liquid."""

    name: str
    nodes: list[Node]
    edges: list[tuple[int, int]]
    wet_junctions: list[int] = field(default_factory=list)
    lens_edges: list[int] = field(default_factory=list)
    arc_segments: int = ARC_SEGMENTS

    def __post_init__(self):
        deg = [0] * len(self.nodes)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        for j in self.wet_junctions:
            if self.nodes[j].is_terminal or deg[j] != 3:
                raise ValueError(f"template {self.name}: wet junction {j} is not a free degree-3 node")
        for e in self.lens_edges:
            a, b = self.edges[e]
            if not (self.nodes[a].is_terminal and self.nodes[b].is_terminal):
                raise ValueError(f"template {self.name}: lens edge {e} must join two disks")

    @property
    def n_wet(self) -> int:
        return len(self.wet_junctions) + len(self.lens_edges)

    @property
    def n_junctions(self) -> int:
        """Number of free degree-3 nodes (Y junctions of the skeleton)."""
        deg = [0] * len(self.nodes)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return sum(1 for n, d in zip(self.nodes, deg) if not n.is_terminal and d == 3)

    def skeleton(self) -> "Template":
        return Template(self.name + ":skeleton", self.nodes, self.edges, [], [], self.arc_segments)

    def node_xy(self, wire: WireFrame, i: int) -> np.ndarray:
        n = self.nodes[i]
        if n.is_terminal:
            return wire.obstacles[n.obstacle].copy()
        return np.asarray(n.position, dtype=float)


def fermat_point(a, b, c) -> np.ndarray:
    """Point minimising the summed distance to three points (Weiszfeld)."""
    P = np.array([a, b, c], dtype=float)
    x = P.mean(axis=0)
    for _ in range(500):
        d = np.hypot(*(P - x).T)
        if d.min() < 1e-14:
            return x
        w = 1.0 / d
        nx = (P * w[:, None]).sum(0) / w.sum()
        if np.hypot(*(nx - x)) < 1e-15:
            break
        x = nx
    return x


def lens_template(i: int = 0, j: int = 1, name: str = "lens") -> Template:
    return Template(name, [Node(obstacle=i), Node(obstacle=j)], [(0, 1)], [], [0])


def collapsed_y_template(wire: WireFrame, i: int = 0, j: int = 1, k: int = 2,
                         name: str = "collapsed_y") -> Template:
    s = fermat_point(*wire.obstacles[[i, j, k]])
    nodes = [Node(obstacle=i), Node(obstacle=j), Node(obstacle=k), Node(position=tuple(s))]
    return Template(name, nodes, [(3, 0), (3, 1), (3, 2)], [3], [])


# -- geometry helpers -----------------------------------------------------------

def _arc(p, q, bulge_angle: float, n: int, side: float) -> np.ndarray:
    """Circular arc from p to q with half-angle ``bulge_angle``.

    ``side`` = +1 puts the arc to the left of p->q, -1 to the right.  The
    returned array includes both endpoints.
    """
    p, q = np.asarray(p, float), np.asarray(q, float)
    if bulge_angle <= 1e-12:
        t = np.linspace(0, 1, n + 1)[:, None]
        return p + t * (q - p)
    ch = q - p
    L = float(np.hypot(*ch))
    R = L / (2 * math.sin(bulge_angle))
    mid = 0.5 * (p + q)
    nrm = np.array([-ch[1], ch[0]]) / L * side
    centre = mid - nrm * R * math.cos(bulge_angle)
    a0 = math.atan2(*(p - centre)[::-1])
    a1 = math.atan2(*(q - centre)[::-1])
    sweep = (a1 - a0) % (2 * math.pi)
    if side < 0:
        sweep -= 2 * math.pi
    # the short way round, bulging to `side`
    if abs(sweep) > math.pi + 1e-12:
        sweep = sweep - math.copysign(2 * math.pi, sweep)
    ang = a0 + sweep * np.linspace(0, 1, n + 1)
    out = centre + R * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    out[0], out[-1] = p, q
    return out


def lens_half_angle(area_each: float, chord: float) -> float:
    """Half-angle of a circular segment with given chord and area."""
    if area_each <= 0:
        return 0.0
    f = lambda a: (chord / (2 * math.sin(a))) ** 2 * (a - math.sin(a) * math.cos(a)) - area_each
    lo, hi = 1e-9, math.pi / 2
    if f(hi) < 0:
        raise ValueError("lens area exceeds a half disk on this chord")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _concave_triangle(centre, dirs, area_target, n):
    """Three corners along ``dirs`` joined by inward circular arcs."""
    dirs = [np.asarray(d, float) / np.hypot(*d) for d in dirs]
    order = np.argsort([math.atan2(d[1], d[0]) for d in dirs])
    dirs_ccw = [dirs[k] for k in order]

    def build(t):
        corners = [centre + t * d for d in dirs_ccw]
        arcs = [_arc(corners[k], corners[(k + 1) % 3], math.pi / 6, n, side=1.0) for k in range(3)]
        loop = np.vstack([a[:-1] for a in arcs])
        x, y = loop[:, 0], loop[:, 1]
        A = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
        return corners, arcs, A

    _, _, a1 = build(1.0)
    t = math.sqrt(area_target / a1) if a1 > 0 else 0.0
    corners, arcs, _ = build(t)
    # map back to the caller's direction order
    inv = np.empty(3, dtype=int)
    inv[order] = np.arange(3)
    return [corners[inv[k]] for k in range(3)], arcs, order, t


def build_network(tpl: Template, wire: WireFrame, epsilon: float,
                  max_seg_len: float | None = None) -> FilmNetwork:
    """Instantiate the template with total liquid area ``epsilon``."""
    if max_seg_len is None:
        max_seg_len = 0.05 * wire.diameter()
    n_arc = tpl.arc_segments
    wet = tpl.n_wet if epsilon > 0 else 0
    share = epsilon / wet if wet else 0.0

    pts: list[np.ndarray] = []
    anchor: list[int] = []

    def add(p, k=-1):
        pts.append(np.asarray(p, float))
        anchor.append(k)
        return len(pts) - 1

    # neighbours of every node, in edge order
    nbr: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(tpl.nodes))}
    for e, (a, b) in enumerate(tpl.edges):
        nbr[a].append((e, b))
        nbr[b].append((e, a))
    xy = [tpl.node_xy(wire, i) for i in range(len(tpl.nodes))]

    # endpoint index of edge e at node i
    end_idx: dict[tuple[int, int], int] = {}
    edges: list[np.ndarray] = []
    faces: list[list[list[tuple[int, int]]]] = []

    wet_j = set(tpl.wet_junctions) if wet else set()
    lens_e = set(tpl.lens_edges) if wet else set()

    for i, node in enumerate(tpl.nodes):
        if node.is_terminal:
            for e, o in nbr[i]:
                d = xy[o] - xy[i]
                end_idx[(e, i)] = add(wire.obstacles[node.obstacle] + wire.delta * d / np.hypot(*d),
                                      node.obstacle)
        elif i in wet_j:
            dirs = [xy[o] - xy[i] for _, o in nbr[i]]
            corners, arcs, order, _ = _concave_triangle(xy[i], dirs, share, n_arc)
            cidx = [add(c) for c in corners]
            for k, (e, _) in enumerate(nbr[i]):
                end_idx[(e, i)] = cidx[k]
            cyc = []
            for k in range(3):
                a_c, b_c = cidx[order[k]], cidx[order[(k + 1) % 3]]
                arc = arcs[k]
                chain = [a_c] + [add(p) for p in arc[1:-1]] + [b_c]
                edges.append(np.array(chain))
                cyc.append((len(edges) - 1, 1))
            faces.append([cyc])
        else:
            v = add(xy[i])
            for e, _ in nbr[i]:
                end_idx[(e, i)] = v

    for e, (a, b) in enumerate(tpl.edges):
        ia, ib = end_idx[(e, a)], end_idx[(e, b)]
        pa, pb = pts[ia], pts[ib]
        if e in lens_e:
            alpha = lens_half_angle(share / 2.0, float(np.hypot(*(pb - pa))))
            up = _arc(pa, pb, alpha, n_arc, side=1.0)
            dn = _arc(pb, pa, alpha, n_arc, side=1.0)
            c_up = [ia] + [add(p) for p in up[1:-1]] + [ib]
            c_dn = [ib] + [add(p) for p in dn[1:-1]] + [ia]
            edges.append(np.array(c_up))
            edges.append(np.array(c_dn))
            faces.append([[(len(edges) - 2, 1), (len(edges) - 1, 1)]])
            continue
        L = float(np.hypot(*(pb - pa)))
        k = max(1, int(math.ceil(L / max_seg_len)))
        chain = [ia] + [add(pa + (pb - pa) * (s / k)) for s in range(1, k)] + [ib]
        edges.append(np.array(chain))

    return FilmNetwork(wire, np.array(pts), np.array(anchor), edges, faces)


def tangent_length(epsilon: float, n: int = 1) -> float:
    """Tangent length of each wetted Y when ``epsilon`` is split over ``n``."""
    return math.sqrt(epsilon / (n * C1))
