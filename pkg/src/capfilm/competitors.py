"""Comparison networks built inside a ball or a slab.

Every construction returns a new :class:`FilmNetwork` that agrees with the
input outside a compact region.  The cone competitor is the image of the
network under a radial squeeze; cup competitors delete the network inside
the region and replace it by boundary arcs with a thin collar of liquid
(or vacuum); slab competitors are cup competitors for a slab, obtained
either directly or by conjugating the ball construction with a
bi-Lipschitz map that sends slab boundaries to spheres.

In the plane the spherical quantities of the general constructions reduce
to crossing counts (points of the network on a circle) and arc lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .film import FilmNetwork, area, energy, from_polylines, validate
from .geom2d import TOL_GEOM, Disk2
from .wireframe import SpanningClass, is_spanning

TWO_PI = 2.0 * math.pi
ARC_SAMPLES = 256  # boundary samples per full turn
ETA_SCHEDULE = tuple(2.0 ** -k for k in range(1, 13))


class CompetitorError(ValueError):
    pass


class TangentialCrossing(CompetitorError):
    """The network touches the region boundary without crossing it."""


class NoComponent(CompetitorError):
    """No boundary arc with the requested relation to the liquid."""


class RegionNotInside(CompetitorError):
    """The comparison region meets the wire."""


# -- gauges ---------------------------------------------------------------------

class BallGauge:
    """Euclidean norm about ``center``; level sets are circles."""

    def __init__(self, center):
        self.center = np.asarray(center, dtype=float)

    def value(self, P) -> np.ndarray:
        d = np.asarray(P, dtype=float).reshape(-1, 2) - self.center
        return np.hypot(d[:, 0], d[:, 1])

    def unit_value(self, theta) -> np.ndarray:
        return np.ones_like(np.asarray(theta, dtype=float))

    def roots(self, a, b, level) -> list[float]:
        d = b - a
        f = a - self.center
        A = float(d @ d)
        B = 2.0 * float(f @ d)
        C = float(f @ f) - level * level
        if A == 0.0:
            return []
        disc = B * B - 4 * A * C
        if disc < 0:
            return []
        if disc <= 1e-20 * B * B + 1e-30:
            t = -B / (2 * A)
            if 0.0 < t < 1.0:
                raise TangentialCrossing(f"segment tangent to level {level:.6g}")
            return []
        sq = math.sqrt(disc)
        q = -0.5 * (B + math.copysign(sq, B))
        ts = sorted({q / A, C / q if q != 0 else -1.0})
        return [t for t in ts if 0.0 < t < 1.0]

    def corner_angles(self) -> list[float]:
        return []


class SlabGauge:
    """Gauge of the slab ``{|y| < t, |y . nu| < tau t}`` about ``center``."""

    def __init__(self, center, normal, tau):
        self.center = np.asarray(center, dtype=float)
        nu = np.asarray(normal, dtype=float)
        self.nu = nu / np.hypot(*nu)
        self.tau = float(tau)

    def value(self, P) -> np.ndarray:
        d = np.asarray(P, dtype=float).reshape(-1, 2) - self.center
        return np.maximum(np.hypot(d[:, 0], d[:, 1]), np.abs(d @ self.nu) / self.tau)

    def unit_value(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        c = np.cos(theta) * self.nu[0] + np.sin(theta) * self.nu[1]
        return np.maximum(1.0, np.abs(c) / self.tau)

    def roots(self, a, b, level) -> list[float]:
        out = []
        for t in BallGauge(self.center).roots(a, b, level):
            p = a + t * (b - a)
            if abs((p - self.center) @ self.nu) <= self.tau * level * (1 + 1e-14):
                out.append(t)
        ua = (a - self.center) @ self.nu
        ub = (b - self.center) @ self.nu
        for side in (1.0, -1.0):
            den = ub - ua
            if den == 0.0:
                continue
            t = (side * self.tau * level - ua) / den
            if 0.0 < t < 1.0:
                p = a + t * (b - a)
                if np.hypot(*(p - self.center)) <= level * (1 + 1e-14):
                    out.append(t)
        out = sorted(out)
        return [t for k, t in enumerate(out) if k == 0 or t - out[k - 1] > 1e-14]

    def corner_angles(self) -> list[float]:
        base = math.atan2(self.nu[1], self.nu[0])
        half = math.acos(self.tau)
        return [(base + s * half + k * math.pi) % TWO_PI for k in (0, 1) for s in (1, -1)]


def boundary_points(gauge, theta, level) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    rho = level / gauge.unit_value(theta)
    return gauge.center + rho[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])


def _angle_of(gauge, P) -> np.ndarray:
    d = np.asarray(P, dtype=float).reshape(-1, 2) - gauge.center
    return np.mod(np.arctan2(d[:, 1], d[:, 0]), TWO_PI)


# -- cutting a network along a level set ----------------------------------------

@dataclass
class _Cut:
    net: FilmNetwork
    on_level: np.ndarray  # point indices lying on the level set
    wet: dict             # point index -> True when it lies on a wet edge


def cut_network(net: FilmNetwork, gauge, level: float, tol: float | None = None) -> _Cut:
    """Insert the crossings of the network with ``{gauge = level}`` as vertices.

    Vertices already on the level set are kept; a vertex whose neighbours
    lie on the same side counts as a tangency.
    """
    scale = max(level, 1e-300)
    tol = 1e-12 * scale if tol is None else tol
    P = [p for p in net.points]
    anchor = list(net.anchor)
    phi = gauge.value(net.points) - level
    on = set(int(i) for i in np.nonzero(np.abs(phi) <= tol)[0])
    wet_edges = set(net.liquid_edges())
    wet: dict[int, bool] = {}
    edges = []
    for e, ch in enumerate(net.edges):
        new = [int(ch[0])]
        for a, b in zip(ch[:-1], ch[1:]):
            pa, pb = net.points[a], net.points[b]
            ts = gauge.roots(pa, pb, level)
            L = float(np.hypot(*(pb - pa)))
            for t in ts:
                if t * L <= tol or (1 - t) * L <= tol:
                    continue
                P.append(pa + t * (pb - pa))
                anchor.append(-1)
                k = len(P) - 1
                new.append(k)
                on.add(k)
                wet[k] = e in wet_edges
            new.append(int(b))
        for i in new:
            if i in on and i not in wet:
                wet[i] = e in wet_edges
        edges.append(np.array(new, dtype=np.intp))
    Q = np.array(P)
    vals = gauge.value(Q) - level
    vals[list(on)] = 0.0
    # a vertex on the level must separate inside from outside
    for e, ch in enumerate(edges):
        for k in range(len(ch)):
            i = int(ch[k])
            if i not in on:
                continue
            nb = [int(ch[k - 1])] if k > 0 else []
            nb += [int(ch[k + 1])] if k + 1 < len(ch) else []
            side = [np.sign(vals[j]) for j in nb if vals[j] != 0.0]
            if len(side) == 2 and side[0] == side[1]:
                raise TangentialCrossing(f"network touches the level set at point {i}")
    out = FilmNetwork(net.wire, Q, np.array(anchor), edges, net.faces)
    return _Cut(out, np.array(sorted(on), dtype=np.intp), wet)


def _pieces(cut: _Cut, gauge, level, keep_outside: bool) -> list[np.ndarray]:
    """Polylines of the network on the kept side of the level set."""
    net = cut.net
    out = []
    for ch in net.edges:
        P = net.points[ch]
        mid = 0.5 * (P[:-1] + P[1:])
        inside = gauge.value(mid) < level
        keep = ~inside if keep_outside else inside
        run: list[int] = []
        for s in range(len(ch) - 1):
            if keep[s]:
                if not run:
                    run = [s]
                run.append(s + 1)
            elif run:
                out.append(P[run])
                run = []
        if run:
            out.append(P[run])
    return out


def energy_in_region(net: FilmNetwork, gauge, level: float, closed: bool = False) -> float:
    """Relaxed energy of the part of the network inside ``{gauge < level}``.

    Segments are split at the level set first; with ``closed`` a segment
    lying on the level set counts as inside.
    """
    cut = cut_network(net, gauge, level)
    n = cut.net
    p0, p1 = n.segment_endpoints()
    mid = 0.5 * (p0 + p1)
    v = gauge.value(mid)
    inside = v <= level * (1 + 1e-9) if closed else v < level
    L = np.hypot(*(p1 - p0).T)
    return float(np.dot(n.topo.w[inside], L[inside]))


def energy_in_disk(net: FilmNetwork, center, radius: float, closed: bool = False) -> float:
    return energy_in_region(net, BallGauge(center), radius, closed)


def crossing_count(net: FilmNetwork, center, radius: float) -> float:
    """Number of points of the network on the circle, counted with multiplicity."""
    cut = cut_network(net, BallGauge(center), radius)
    return float(sum(2.0 - cut.wet[i] for i in cut.on_level))


# -- cone competitor ------------------------------------------------------------

def _check_inside(net: FilmNetwork, center, radius: float, factor: float = 1.0):
    w = net.wire
    d = np.hypot(*(w.obstacles - np.asarray(center, dtype=float)).T) - w.delta
    if d.min() <= factor * radius:
        raise RegionNotInside(f"ball of radius {radius:.4g} meets the wire")


def cone_map(center, radius: float, eta: float):
    """Radial squeeze collapsing the ball onto its centre as ``eta -> 0``."""
    c = np.asarray(center, dtype=float)
    e = eta / radius
    r_in = radius * (1.0 - e)

    def u(t):
        t = np.asarray(t, dtype=float)
        lo = e * t
        mid = e * r_in + (t - r_in) / (radius - r_in) * (radius - e * r_in)
        return np.where(t <= r_in, lo, np.where(t <= radius, mid, t))

    def f(P):
        d = np.asarray(P, dtype=float).reshape(-1, 2) - c
        t = np.hypot(d[:, 0], d[:, 1])
        s = np.where(t > 0, u(t) / np.where(t > 0, t, 1.0), 0.0)
        return c + d * s[:, None]

    return f


def _refine_where(net: FilmNetwork, mask_fn, h: float) -> FilmNetwork:
    P = [p for p in net.points]
    anchor = list(net.anchor)
    edges = []
    for ch in net.edges:
        new = [int(ch[0])]
        for a, b in zip(ch[:-1], ch[1:]):
            pa, pb = net.points[a], net.points[b]
            if mask_fn(pa, pb):
                k = int(np.ceil(np.hypot(*(pb - pa)) / h - 1e-12))
                for j in range(1, k):
                    P.append(pa + (pb - pa) * (j / k))
                    anchor.append(-1)
                    new.append(len(P) - 1)
            new.append(int(b))
        edges.append(np.array(new, dtype=np.intp))
    return FilmNetwork(net.wire, np.array(P), np.array(anchor), edges, net.faces)


def cone_competitor(net: FilmNetwork, ball: Disk2, eta: float) -> FilmNetwork:
    """Image of the network under the radial squeeze of ``ball``.

    The part inside the ball is pushed towards the centre; as ``eta -> 0``
    it becomes the cone over the crossings of the network with the circle.
    """
    c = np.asarray(ball.center, dtype=float)
    r = float(ball.radius)
    if not 0 < eta < r / 2 + 1e-15:
        raise ValueError("eta must lie in (0, r/2]")
    _check_inside(net, c, r)
    r_in = r - eta
    g = BallGauge(c)
    cut = cut_network(cut_network(net, g, r).net, g, r_in)

    def in_annulus(pa, pb):
        m = g.value(np.array([0.5 * (pa + pb)]))[0]
        return r_in <= m <= r

    fine = _refine_where(cut.net, in_annulus, max(eta / 16.0, 1e-6 * r))
    return fine.with_points(cone_map(c, r, eta)(fine.points))


# -- cup competitors --------------------------------------------------------------

@dataclass
class _Arc:
    start: float      # angle of the first crossing
    stop: float       # angle of the next crossing (> start)
    p_start: np.ndarray
    p_stop: np.ndarray
    wet: bool         # inside the liquid
    length: float


def _arc_samples(gauge, level, a0, a1, p0, p1, extra=()) -> np.ndarray:
    """Boundary polyline between angles ``a0 < a1`` with exact end points."""
    grid = np.arange(0.0, TWO_PI, TWO_PI / ARC_SAMPLES)
    cand = np.concatenate([grid, np.asarray(list(extra) + gauge.corner_angles(), dtype=float)])
    k = np.mod(cand - a0, TWO_PI)
    inner = np.sort(a0 + k[(k > 1e-9) & (k < a1 - a0 - 1e-9)])
    pts = boundary_points(gauge, inner, level) if len(inner) else np.empty((0, 2))
    return np.vstack([p0, pts, p1])


def _arcs(cut: _Cut, gauge, level, liquid_contains, extra=()) -> list[_Arc]:
    P = cut.net.points
    idx = cut.on_level
    if len(idx) == 0:
        return []
    ang = _angle_of(gauge, P[idx])
    order = np.argsort(ang)
    idx, ang = idx[order], ang[order]
    if len(ang) > 1 and np.min(np.diff(np.append(ang, ang[0] + TWO_PI))) < 1e-12:
        raise TangentialCrossing("two crossings coincide on the boundary")
    out = []
    n = len(idx)
    for k in range(n):
        a0 = ang[k]
        a1 = ang[(k + 1) % n] + (TWO_PI if k + 1 >= n else 0.0)
        pts = _arc_samples(gauge, level, a0, a1, P[idx[k]], P[idx[(k + 1) % n]], extra)
        mid = boundary_points(gauge, np.array([0.5 * (a0 + a1)]), level)[0]
        L = float(np.hypot(*np.diff(pts, axis=0).T).sum())
        out.append(_Arc(a0, a1, P[idx[k]], P[idx[(k + 1) % n]], bool(liquid_contains(mid)), L))
    return out


def _in_runs(theta, runs) -> bool:
    for a0, a1 in runs:
        if 0.0 < (theta - a0) % TWO_PI < a1 - a0:
            return True
    return False


def _liquid_test(net: FilmNetwork):
    from shapely import prepared
    from shapely.geometry import Point

    if not net.faces:
        return lambda p: False
    poly = prepared.prep(net.liquid_polygon())
    return lambda p: poly.contains(Point(float(p[0]), float(p[1])))


@dataclass
class CupInfo:
    """Geometry of a cup construction (for reports and bounds)."""

    chosen: _Arc | None
    uncovered: float        # length of the boundary outside the chosen arc
    liquid_boundary: float  # length of the boundary inside the liquid
    collar: float           # total length of the collared arcs
    crossings: int


def _cup(net: FilmNetwork, gauge, level: float, choice: str, eta: float, exterior: bool = False,
         extra_angles=(), return_info: bool = False):
    if choice not in ("outside-E", "inside-E"):
        raise ValueError("choice must be 'outside-E' or 'inside-E'")
    if exterior and choice != "outside-E":
        raise ValueError("the exterior cup uses an arc outside the liquid")
    if not 0 < eta < level / 2:
        raise ValueError("eta must lie in (0, level/2)")
    in_E = _liquid_test(net)
    cut = cut_network(net, gauge, level)
    arcs = _arcs(cut, gauge, level, in_E, extra_angles)
    want_wet = choice == "inside-E"
    if not arcs:
        full_wet = bool(in_E(boundary_points(gauge, np.array([0.0]), level)[0]))
        if full_wet != want_wet:
            raise NoComponent("the whole boundary has the other relation to the liquid")
        chosen = None
        runs: list[tuple[float, float]] = []
        others: list[_Arc] = []
    else:
        cand = [a for a in arcs if a.wet == want_wet]
        if not cand:
            raise NoComponent("no boundary arc with the requested relation to the liquid")
        chosen = max(cand, key=lambda a: a.length)
        if len(arcs) == 1 and cut.wet.get(int(cut.on_level[0]), False):
            # a single wet crossing cannot separate liquid from vacuum
            raise CompetitorError("single wet crossing: degenerate cup configuration")
        others = [a for a in arcs if a is not chosen]
        collared = [a for a in others if a.wet == want_wet]
        runs = _merge_runs(collared)
    inner = level + eta if exterior else level - eta
    polys = _pieces(cut, gauge, level, keep_outside=not exterior)
    for a in others:
        polys.append(_arc_samples(gauge, level, a.start, a.stop, a.p_start, a.p_stop, extra_angles))
    for a0, a1, q0, q1 in runs:
        b0 = boundary_points(gauge, np.array([a0]), inner)[0]
        b1 = boundary_points(gauge, np.array([a1]), inner)[0]
        polys.append(_arc_samples(gauge, inner, a0, a1, b0, b1, extra_angles))
        polys.append(np.array([q0, b0]))
        polys.append(np.array([q1, b1]))
    run_ang = [(a0, a1) for a0, a1, _, _ in runs]
    lo, hi = (level, inner) if exterior else (inner, level)

    def liquid(p):
        v = gauge.value(np.asarray(p)[None, :])[0]
        collar = lo < v < hi and _in_runs(_angle_of(gauge, np.asarray(p)[None, :])[0], run_ang)
        if exterior:
            return (v < level and in_E(p)) or collar
        if v > level:
            return in_E(p)
        return collar if not want_wet else not collar

    comp = from_polylines(net.wire, polys, liquid=liquid)
    if not return_info:
        return comp
    uncovered = sum(a.length for a in others)
    info = CupInfo(chosen, uncovered, sum(a.length for a in others if a.wet),
                   sum(a.length for a in others if a.wet == want_wet), len(arcs))
    return comp, info


def _merge_runs(arcs: Sequence[_Arc]):
    """Join collared arcs that meet at a crossing into maximal runs."""
    if not arcs:
        return []
    arcs = sorted(arcs, key=lambda a: a.start)
    runs = []
    cur = [arcs[0].start, arcs[0].stop, arcs[0].p_start, arcs[0].p_stop]
    for a in arcs[1:]:
        if abs(a.start - cur[1]) < 1e-12:
            cur[1], cur[3] = a.stop, a.p_stop
        else:
            runs.append(tuple(cur))
            cur = [a.start, a.stop, a.p_start, a.p_stop]
    runs.append(tuple(cur))
    if len(runs) > 1 and abs((runs[-1][1] - TWO_PI) - runs[0][0]) < 1e-12:
        last, first = runs.pop(), runs[0]
        runs[0] = (last[0], first[1] + TWO_PI, last[2], first[3])
    return runs


def cup_competitor(net: FilmNetwork, ball: Disk2, component_choice: str = "outside-E",
                   eta: float | None = None, return_info: bool = False):
    """Replace the network inside ``ball`` by boundary arcs and a thin collar.

    With ``outside-E`` the longest boundary arc outside the liquid is left
    open and the remaining dry arcs are thickened inwards into liquid
    strips; with ``inside-E`` the ball is flooded except for vacuum strips
    under the remaining wet arcs.
    """
    r = float(ball.radius)
    eta = r / 2 ** 8 if eta is None else eta
    _check_inside(net, ball.center, r)
    return _cup(net, BallGauge(ball.center), r, component_choice, eta, return_info=return_info)


def exterior_cup_competitor(net: FilmNetwork, radius: float, eta: float | None = None,
                            center=(0.0, 0.0), return_info: bool = False):
    """Cut the network off at ``B_R(center)`` and close it with an outward collar."""
    c = np.asarray(center, dtype=float)
    w = net.wire
    if np.max(np.hypot(*(w.obstacles - c).T) + w.delta) >= radius:
        raise RegionNotInside("the wire must lie inside the ball")
    eta = radius / 2 ** 8 if eta is None else eta
    return _cup(net, BallGauge(c), float(radius), "outside-E", eta, exterior=True, return_info=return_info)


# -- slab competitors --------------------------------------------------------------

@dataclass(frozen=True)
class SlabSpec:
    center: tuple[float, float]
    radius: float
    normal: tuple[float, float]
    tau: float
    eta: float

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if not 0 < self.eta < self.radius / 2:
            raise ValueError("eta must lie in (0, r/2)")
        n = math.hypot(*self.normal)
        if n == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", (self.normal[0] / n, self.normal[1] / n))

    @property
    def gauge(self) -> SlabGauge:
        return SlabGauge(self.center, self.normal, self.tau)


class SlabMap:
    """Bi-Lipschitz map sending ``{gauge = t}`` to the circle of radius ``t``.

    On each ray from the centre the map is piecewise linear in the
    distance ``s``: ``s -> s phi`` up to ``s = 4r/(3 phi)``, then linear up to
    the identity at ``s = 5r/3`` (``phi >= 1`` is the gauge of the unit
    direction).  It is the identity outside ``B_{5r/3}``.
    """

    def __init__(self, spec: SlabSpec):
        self.spec = spec
        self.g = spec.gauge
        self.c = np.asarray(spec.center, dtype=float)
        self.r = float(spec.radius)

    def _polar(self, P):
        d = np.asarray(P, dtype=float).reshape(-1, 2) - self.c
        s = np.hypot(d[:, 0], d[:, 1])
        th = np.arctan2(d[:, 1], d[:, 0])
        return d, s, self.g.unit_value(th)

    def __call__(self, P) -> np.ndarray:
        d, s, phi = self._polar(P)
        r = self.r
        s_in, s_out = 4 * r / (3 * phi), 5 * r / 3
        lin = 4 * r / 3 + (s - s_in) * (s_out - 4 * r / 3) / (s_out - s_in)
        g = np.where(s <= s_in, s * phi, np.where(s <= s_out, lin, s))
        scale = np.where(s > 0, g / np.where(s > 0, s, 1.0), 1.0)
        return self.c + d * scale[:, None]

    def inverse(self, Q) -> np.ndarray:
        d, g, phi = self._polar(Q)
        r = self.r
        s_in, s_out = 4 * r / (3 * phi), 5 * r / 3
        lin = s_in + (g - 4 * r / 3) * (s_out - s_in) / (s_out - 4 * r / 3)
        s = np.where(g <= 4 * r / 3, g / phi, np.where(g <= s_out, lin, g))
        scale = np.where(g > 0, s / np.where(g > 0, g, 1.0), 1.0)
        return self.c + d * scale[:, None]

    def lipschitz(self, n: int = 4000, seed: int = 0) -> tuple[float, float]:
        """Measured Lipschitz constants of the map and of its inverse."""
        rng = np.random.default_rng(seed)
        R = 2 * self.r
        th = rng.uniform(0, TWO_PI, n)
        rad = R * np.sqrt(rng.uniform(0, 1, n))
        P = self.c + rad[:, None] * np.column_stack([np.cos(th), np.sin(th)])
        step = 1e-6 * self.r
        dirs = rng.normal(size=(n, 2))
        dirs /= np.hypot(*dirs.T)[:, None]
        Q = P + step * dirs
        fP, fQ = self(P), self(Q)
        fwd = np.hypot(*(fQ - fP).T) / step
        return float(fwd.max()), float((1.0 / fwd).max())


def _slab_prepare(net: FilmNetwork, spec: SlabSpec) -> FilmNetwork:
    _check_inside(net, spec.center, spec.radius, factor=2.0)
    g = spec.gauge
    base = BallGauge(spec.center)
    fine = _refine_where(net, lambda pa, pb: base.value(np.array([0.5 * (pa + pb)]))[0] < 2 * spec.radius,
                         spec.radius / 32)
    return cut_network(fine, g, spec.radius).net


def slab_competitor(net: FilmNetwork, spec: SlabSpec, component_choice: str = "outside-E",
                    method: str = "conjugate") -> FilmNetwork:
    """Cup competitor for the slab ``S_{tau,r}(x)``.

    ``conjugate`` maps the network by :class:`SlabMap`, builds the ball cup
    and maps back; ``direct`` builds the cup on the slab boundary itself.
    """
    pre = _slab_prepare(net, spec)
    corners = spec.gauge.corner_angles()
    if method == "direct":
        return _cup(pre, spec.gauge, spec.radius, component_choice, spec.eta, extra_angles=())
    if method != "conjugate":
        raise ValueError("method must be 'conjugate' or 'direct'")
    phi = SlabMap(spec)
    image = pre.with_points(phi(pre.points))
    image = FilmNetwork(image.wire, image.points, image.anchor, image.edges, image.faces)
    G = _cup(image, BallGauge(spec.center), spec.radius, component_choice, spec.eta, extra_angles=corners)
    return G.with_points(phi.inverse(G.points))


# -- minimality check -------------------------------------------------------------

@dataclass
class Record:
    ball: tuple[float, float, float]
    construction: str
    F_before: float
    F_after: float
    area_delta: float
    verdict: str
    note: str = ""

    def line(self) -> str:
        x, y, r = self.ball
        return (f"ball=({x:.6g},{y:.6g},{r:.6g}) construction={self.construction} "
                f"F_before={self.F_before!r} F_after={self.F_after!r} area_delta={self.area_delta!r} "
                f"verdict={self.verdict}" + (f" note={self.note}" if self.note else ""))


@dataclass
class MinimalityReport:
    records: list[Record] = field(default_factory=list)
    C_star: float = 0.0
    slack: float = 0.0

    @property
    def violations(self) -> list[Record]:
        return [r for r in self.records if r.verdict == "violation"]

    def to_text(self) -> str:
        head = f"# minimality check C_star={self.C_star!r} slack={self.slack!r} violations={len(self.violations)}\n"
        return head + "".join(r.line() + "\n" for r in self.records)


def sample_balls(net: FilmNetwork, n: int, rng: np.random.Generator | int | None = None,
                 r_range=(0.02, 0.1), max_tries: int = 200) -> list[Disk2]:
    """Random balls centred on the network, compactly inside the complement of the wire.

    Radii are drawn from ``r_range`` times the wire diameter and reduced so
    that the doubled ball stays clear of the wire.
    """
    rng = np.random.default_rng(rng)
    p0, p1 = net.segment_endpoints()
    L = np.hypot(*(p1 - p0).T)
    prob = L / L.sum()
    diam = net.wire.diameter()
    w = net.wire
    out = []
    for _ in range(max_tries):
        if len(out) >= n:
            break
        s = rng.choice(len(L), p=prob)
        c = p0[s] + rng.uniform() * (p1[s] - p0[s])
        gap = float(np.min(np.hypot(*(w.obstacles - c).T)) - w.delta)
        r = min(rng.uniform(*r_range) * diam, 0.45 * gap)
        if r <= 1e-3 * diam:
            continue
        out.append(Disk2((float(c[0]), float(c[1])), float(r)))
    return out


def _attempt(build, ball_r, tries=5):
    last = None
    for k in range(tries):
        try:
            return build(ball_r * (1.0 - 1e-3 * k)), None
        except TangentialCrossing as exc:
            last = exc
    return None, last


def verify_minimality(net: FilmNetwork, balls: Sequence[Disk2], C_star: float,
                      cls: SpanningClass | None = None, slack_tol: float | None = None,
                      eta_ratio: float = 2.0 ** -8, slab_tau: float = 0.5,
                      constructions: Sequence[str] = ("cone", "cup-outside", "cup-inside", "slab")) -> MinimalityReport:
    """Compare the network with every applicable competitor in every ball.

    A record is a violation when ``F(net) > F(comp) + C_star |area change| +
    slack``.  Competitors that fail to span (when ``cls`` is given) or to
    validate are reported as inadmissible, never as violations.
    """
    F0 = energy(net, check=False, with_lambda=False).energy_F
    A0 = area(net)
    slack = 1e-4 * F0 if slack_tol is None else slack_tol
    rep = MinimalityReport(C_star=C_star, slack=slack)
    for ball in balls:
        c = np.asarray(ball.center, dtype=float)
        for kind in constructions:
            def build(r):
                b = Disk2(ball.center, r)
                if kind == "cone":
                    return cone_competitor(net, b, eta_ratio * r)
                if kind == "cup-outside":
                    return cup_competitor(net, b, "outside-E", eta_ratio * r)
                if kind == "cup-inside":
                    return cup_competitor(net, b, "inside-E", eta_ratio * r)
                if kind == "slab":
                    r2 = 0.5 * r
                    nu = (1.0, 0.0)
                    return slab_competitor(net, SlabSpec(ball.center, r2, nu, slab_tau, eta_ratio * r2),
                                           "outside-E")
                raise ValueError(f"unknown construction {kind!r}")

            try:
                comp, err = _attempt(build, ball.radius)
            except (NoComponent, RegionNotInside):
                continue
            except CompetitorError as exc:
                rep.records.append(Record((c[0], c[1], ball.radius), kind, F0, math.nan, math.nan,
                                          "skipped", str(exc)))
                continue
            if comp is None:
                rep.records.append(Record((c[0], c[1], ball.radius), kind, F0, math.nan, math.nan,
                                          "skipped", str(err)))
                continue
            bad = validate(comp)
            if bad or (cls is not None and not is_spanning(comp, net.wire, cls, want_witness=False)):
                note = bad[0].kind if bad else "not spanning"
                rep.records.append(Record((c[0], c[1], ball.radius), kind, F0, math.nan, math.nan,
                                          "inadmissible", note))
                continue
            F1 = energy(comp, check=False, with_lambda=False).energy_F
            dA = area(comp) - A0
            ok = F0 <= F1 + C_star * abs(dA) + slack
            rep.records.append(Record((c[0], c[1], ball.radius), kind, F0, F1, dA,
                                      "ok" if ok else "violation"))
    return rep
