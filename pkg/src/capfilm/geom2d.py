"""Planar primitives and predicates.

Points are plain ``(x, y)`` tuples or length-2 numpy arrays; the named
tuples below are used where a self-describing value helps (public API,
reports).
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

TOL_GEOM = 1e-9
MAX_PERTURB = 8
PERTURB_ANGLE = 1e-7


class DegenerateCrossing(ValueError):
    """A path vertex sits on a cut ray even after perturbation."""


class Point2(NamedTuple):
    x: float
    y: float


class Segment2(NamedTuple):
    a: Point2
    b: Point2


class Disk2(NamedTuple):
    center: Point2
    radius: float

    def contains(self, p, strict: bool = True, tol: float = TOL_GEOM) -> bool:
        d = math.hypot(p[0] - self.center[0], p[1] - self.center[1])
        return d < self.radius - tol if strict else d <= self.radius + tol


class Crossing(Enum):
    NONE = "none"
    PROPER = "proper"
    TOUCH = "touch"
    OVERLAP = "overlap"


class Intersection(NamedTuple):
    kind: Crossing
    point: Point2 | None


def cross(ax, ay, bx, by) -> float:
    return ax * by - ay * bx


def _orient(a, b, c, tol) -> int:
    v = cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])
    scale = math.hypot(b[0] - a[0], b[1] - a[1])
    if abs(v) <= tol * scale:
        return 0
    return 1 if v > 0 else -1


def _on_segment(p, a, b, tol) -> bool:
    return (min(a[0], b[0]) - tol <= p[0] <= max(a[0], b[0]) + tol
            and min(a[1], b[1]) - tol <= p[1] <= max(a[1], b[1]) + tol)


def segment_intersect(s1, s2, tol: float = TOL_GEOM) -> Intersection:
    """Classify the intersection of two closed segments.

    Returns ``PROPER`` when the interiors cross transversally, ``TOUCH``
    when they share exactly one point that is an endpoint of at least one
    of them, ``OVERLAP`` for collinear segments sharing a sub-segment and
    ``NONE`` otherwise.  The classification is symmetric in the arguments;
    for ``OVERLAP`` the returned point is the midpoint of the shared piece.
    """
    (a, b), (c, d) = s1, s2
    o1 = _orient(a, b, c, tol)
    o2 = _orient(a, b, d, tol)
    o3 = _orient(c, d, a, tol)
    o4 = _orient(c, d, b, tol)

    if o1 == o2 == o3 == o4 == 0:
        # collinear: project on the dominant axis of s1 (or s2 if s1 is tiny)
        ux, uy = b[0] - a[0], b[1] - a[1]
        if math.hypot(ux, uy) < tol:
            ux, uy = d[0] - c[0], d[1] - c[1]
        norm = math.hypot(ux, uy)
        if norm < tol:
            if math.hypot(a[0] - c[0], a[1] - c[1]) <= tol:
                return Intersection(Crossing.TOUCH, Point2(a[0], a[1]))
            return Intersection(Crossing.NONE, None)
        ux, uy = ux / norm, uy / norm
        t = [p[0] * ux + p[1] * uy for p in (a, b, c, d)]
        lo = max(min(t[0], t[1]), min(t[2], t[3]))
        hi = min(max(t[0], t[1]), max(t[2], t[3]))
        if hi < lo - tol:
            return Intersection(Crossing.NONE, None)
        if hi - lo <= tol:
            # single shared point
            for p in (a, b):
                if _on_segment(p, c, d, tol) and abs(p[0] * ux + p[1] * uy - lo) <= 2 * tol:
                    return Intersection(Crossing.TOUCH, Point2(p[0], p[1]))
            for p in (c, d):
                if _on_segment(p, a, b, tol):
                    return Intersection(Crossing.TOUCH, Point2(p[0], p[1]))
            return Intersection(Crossing.NONE, None)
        mid = 0.5 * (lo + hi)
        # a point on the common line at parameter `mid`
        base = a[0] * ux + a[1] * uy
        px, py = a[0] + (mid - base) * ux, a[1] + (mid - base) * uy
        return Intersection(Crossing.OVERLAP, Point2(px, py))

    if o1 * o2 < 0 and o3 * o4 < 0:
        r = (b[0] - a[0], b[1] - a[1])
        s = (d[0] - c[0], d[1] - c[1])
        den = cross(r[0], r[1], s[0], s[1])
        t = cross(c[0] - a[0], c[1] - a[1], s[0], s[1]) / den
        return Intersection(Crossing.PROPER, Point2(a[0] + t * r[0], a[1] + t * r[1]))

    # touching configurations: one endpoint on the other segment
    for o, p, (q0, q1) in ((o1, c, (a, b)), (o2, d, (a, b)), (o3, a, (c, d)), (o4, b, (c, d))):
        if o == 0 and _on_segment(p, q0, q1, tol):
            return Intersection(Crossing.TOUCH, Point2(p[0], p[1]))
    return Intersection(Crossing.NONE, None)


def polygon_area(loop: Sequence) -> float:
    """Signed shoelace area, positive for counterclockwise loops."""
    pts = np.asarray(loop, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise ValueError("polygon_area needs at least 3 vertices")
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polyline_length(pts) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def _parity_once(pts: np.ndarray, origin, direction, tol) -> int:
    dx, dy = direction
    # local frame: u along the ray, w across it
    rel = pts - np.asarray(origin, dtype=float)
    u = rel[:, 0] * dx + rel[:, 1] * dy
    w = -rel[:, 0] * dy + rel[:, 1] * dx
    if np.any((np.abs(w) <= tol) & (u >= -tol)):
        raise DegenerateCrossing("vertex on cut ray")
    w0, w1 = w[:-1], w[1:]
    sign_change = (w0 > 0) != (w1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = w0 / (w0 - w1)
    u_cross = u[:-1] + t * (u[1:] - u[:-1])
    return int(np.count_nonzero(sign_change & (u_cross > 0)) % 2)


def ray_crossing_parity(path, origin, direction=(1.0, 0.0), tol: float = TOL_GEOM,
                        max_perturb: int = MAX_PERTURB) -> int:
    """Parity of transversal crossings between a polyline and a ray.

    ``path`` is a sequence of vertices; pass a closed loop by repeating the
    first vertex or let the function close it (it always closes paths whose
    endpoints differ by more than ``tol``, since parity of an open path
    against a ray is only meaningful for loops).  A vertex lying on the ray
    triggers deterministic rotation of the ray by ``k * 1e-7`` rad.
    """
    pts = np.asarray(path, dtype=float)
    if len(pts) and np.hypot(*(pts[0] - pts[-1])) > tol:
        pts = np.vstack([pts, pts[:1]])
    dx, dy = direction
    n = math.hypot(dx, dy)
    base = math.atan2(dy / n, dx / n)
    for k in range(max_perturb + 1):
        ang = base + k * PERTURB_ANGLE
        try:
            return _parity_once(pts, origin, (math.cos(ang), math.sin(ang)), tol)
        except DegenerateCrossing:
            continue
    raise DegenerateCrossing(f"path vertex on cut after {max_perturb} perturbations")


def point_in_polygon(p, loop) -> bool:
    """Even-odd containment via :func:`ray_crossing_parity`."""
    return ray_crossing_parity(loop, p, (1.0, 0.0)) == 1


def point_segment_distance(p, a, b) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    L2 = ax * ax + ay * ay
    if L2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - a[0] - t * ax, p[1] - a[1] - t * ay)


def segment_distance(s1, s2) -> float:
    if segment_intersect(s1, s2).kind is not Crossing.NONE:
        return 0.0
    (a, b), (c, d) = s1, s2
    return min(point_segment_distance(a, c, d), point_segment_distance(b, c, d),
               point_segment_distance(c, a, b), point_segment_distance(d, a, b))


def segment_circle_params(a, b, center, radius) -> list[float]:
    """Parameters ``t`` in [0, 1] where segment a->b meets the circle."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    fx, fy = a[0] - center[0], a[1] - center[1]
    A = dx * dx + dy * dy
    B = 2 * (fx * dx + fy * dy)
    C = fx * fx + fy * fy - radius * radius
    disc = B * B - 4 * A * C
    if A == 0.0 or disc < 0:
        return []
    sq = math.sqrt(disc)
    out = []
    for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
        if -1e-12 <= t <= 1 + 1e-12:
            out.append(min(1.0, max(0.0, t)))
    return out


def rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return (c * v[0] - s * v[1], s * v[0] + c * v[1])


def angle_between(u, v) -> float:
    """Unsigned angle in radians between two vectors."""
    return abs(math.atan2(cross(u[0], u[1], v[0], v[1]), u[0] * v[0] + u[1] * v[1]))
