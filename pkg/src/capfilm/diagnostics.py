"""Checks run on converged networks.

Stationarity against test fields, junction angles, density ratios and
their monotonicity, the convex hull property, and a smoothed distance
between the length measure of a film and that of a Plateau network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .competitors import energy_in_disk
from .film import FilmNetwork
from .geom2d import TOL_GEOM, point_segment_distance
from .relaxation import estimate_lambda
from .wireframe import WireFrame

MONO_TOL = 1e-3
HULL_TOL = 1e-6


class FieldViolatesBoundaryCondition(ValueError):
    pass


class CenterOffNetwork(ValueError):
    pass


# -- test fields ------------------------------------------------------------------

@dataclass
class TestField:
    """Polynomial vector field windowed by a C2 bump on a disk.

    ``X(p) = (1 - s^2)^3 sum_ab C_ab u^a v^b`` with ``(u, v) = (p - c)/rho``
    and ``s = |(u, v)|``; zero outside the support disk.
    """

    __test__ = False  # not a pytest class

    center: tuple[float, float]
    radius: float
    coeffs: np.ndarray  # (n_terms, 2)
    degree: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1, 2)
        if len(self.coeffs) != len(self.monomials(self.degree)):
            raise ValueError("coefficient count does not match the degree")

    @staticmethod
    def monomials(degree: int) -> list[tuple[int, int]]:
        return [(a, d - a) for d in range(degree + 1) for a in range(d + 1)]

    def __call__(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        uv = (P - np.asarray(self.center)) / self.radius
        s2 = (uv ** 2).sum(1)
        win = np.where(s2 < 1.0, (1.0 - s2) ** 3, 0.0)
        basis = np.column_stack([uv[:, 0] ** a * uv[:, 1] ** b for a, b in self.monomials(self.degree)])
        return win[:, None] * (basis @ self.coeffs)

    def sup_norm(self, n: int = 64) -> float:
        t = np.linspace(-1, 1, n)
        g = np.array(np.meshgrid(t, t)).reshape(2, -1).T * self.radius + np.asarray(self.center)
        return float(np.hypot(*self(g).T).max())

    def check(self, wire: WireFrame):
        d = np.hypot(*(wire.obstacles - np.asarray(self.center)).T) - wire.delta
        if d.min() < self.radius - 1e-8:
            raise FieldViolatesBoundaryCondition("field support meets the wire")


def random_fields(net: FilmNetwork, n: int, rng=None, degree: int = 2,
                  r_range=(0.05, 0.25), on_liquid: bool = True) -> list[TestField]:
    """Fields supported on disks centred on the network and clear of the wire."""
    rng = np.random.default_rng(rng)
    t = net.topo
    p0, p1 = net.segment_endpoints()
    w = net.wire
    L = np.hypot(*(p1 - p0).T)
    wts = L * (t.w == 1.0) if on_liquid and (t.w == 1.0).any() else L.copy()
    diam = w.diameter()
    out = []
    for _ in range(100 * n):
        if len(out) >= n:
            break
        s = rng.choice(len(L), p=wts / wts.sum())
        c = p0[s] + rng.uniform() * (p1[s] - p0[s])
        gap = float(np.min(np.hypot(*(w.obstacles - c).T)) - w.delta)
        rho = min(rng.uniform(*r_range) * diam, 0.9 * gap)
        if rho <= 1e-3 * diam:
            continue
        k = len(TestField.monomials(degree))
        out.append(TestField((float(c[0]), float(c[1])), float(rho), rng.normal(size=(k, 2)), degree))
    return out


def first_variation(net: FilmNetwork, X: TestField) -> float:
    """Derivative of the relaxed energy along ``X`` (exact for polylines)."""
    t = net.topo
    P = net.points
    d = P[t.sb] - P[t.sa]
    L = np.hypot(d[:, 0], d[:, 1])
    tau = d / L[:, None]
    XP = X(P)
    return float((t.w * ((XP[t.sb] - XP[t.sa]) * tau).sum(1)).sum())


def flux(net: FilmNetwork, X: TestField, gross: bool = False) -> float:
    """Midpoint-rule integral of ``X . nu`` over the liquid boundary (outer normal).

    With ``gross`` the integral of ``|X|`` is returned instead.
    """
    total = 0.0
    P = net.points
    for face in net.faces:
        for cyc in face:
            q = P[net.cycle_points(cyc)]
            r = np.roll(q, -1, axis=0)
            d = r - q
            Xm = X(0.5 * (q + r))
            if gross:
                total += float((np.hypot(*Xm.T) * np.hypot(*d.T)).sum())
            else:
                nu = np.column_stack([d[:, 1], -d[:, 0]])  # length-weighted outer normal (ccw loop)
                total += float((Xm * nu).sum())
    return total


def _gross_variation(net: FilmNetwork, X: TestField) -> float:
    t = net.topo
    XP = X(net.points)
    return float((t.w * np.hypot(*(XP[t.sb] - XP[t.sa]).T)).sum())


def el_residual(net: FilmNetwork, lam: float, fields: Sequence[TestField]) -> float:
    """Largest relative mismatch between first variation and ``lam`` times flux.

    The mismatch is divided by ``|lhs| + |rhs| + scale`` where ``scale`` is
    the gross size of the two integrands (``|lam| int |X|`` over the liquid
    boundary plus the weighted total variation of ``X`` along the network),
    so that near cancellation of the fluxes of opposite boundary arcs does
    not inflate the residual.
    """
    worst = 0.0
    for X in fields:
        X.check(net.wire)
        lhs = lam * flux(net, X)
        rhs = first_variation(net, X)
        scale = abs(lam) * flux(net, X, gross=True) + _gross_variation(net, X) + 1e-300
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs) + scale))
    return worst


# -- junctions ----------------------------------------------------------------------

@dataclass
class Junction:
    kind: str                    # "dry": degree-3 vertex, "wet": liquid face with three legs
    where: tuple[float, float]
    directions: np.ndarray       # unit vectors, counter-clockwise order
    angles_deg: np.ndarray       # consecutive angles, summing to 360
    deviation_deg: float         # max |angle - 120|


def _direction(net: FilmNetwork, e: int, v: int) -> np.ndarray:
    ch = net.edges[e]
    q = net.points[ch] if ch[0] == v else net.points[ch[::-1]]
    d = q[1] - q[0]
    return d / np.hypot(*d)


def _triple(dirs) -> tuple[np.ndarray, np.ndarray]:
    dirs = np.asarray(dirs)
    ang = np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), 2 * math.pi)
    order = np.argsort(ang)
    a = ang[order]
    gaps = np.degrees(np.diff(np.append(a, a[0] + 2 * math.pi)))
    return dirs[order], gaps


def junction_report(net: FilmNetwork) -> list[Junction]:
    """Angles at Y junctions.

    A dry junction is a degree-3 vertex none of whose edges bounds liquid.
    A wet junction is a liquid face touching exactly three collapsed legs;
    its angles are those between the legs, i.e. the Y point the droplet
    replaces.
    """
    out = []
    deg = net.degree()
    mult = net.edge_multiplicity()
    inc: dict[int, list[int]] = {}
    for e, ch in enumerate(net.edges):
        for v in (int(ch[0]), int(ch[-1])):
            inc.setdefault(v, []).append(e)
    for v, d in deg.items():
        if d != 3 or net.anchor[v] >= 0:
            continue
        es = inc[v]
        if any(mult[e] != 2.0 for e in es):
            continue
        dirs, gaps = _triple([_direction(net, e, v) for e in es])
        out.append(Junction("dry", tuple(map(float, net.points[v])), dirs, gaps,
                            float(np.abs(gaps - 120.0).max())))
    for fi, face in enumerate(net.faces):
        bverts = {int(net.edges[e][k]) for cyc in face for e, _ in cyc for k in (0, -1)}
        legs = []
        for v in sorted(bverts):
            for e in inc.get(v, []):
                if mult[e] == 2.0:
                    legs.append((v, e))
        if len(legs) != 3 or any(net.anchor[v] >= 0 for v, _ in legs):
            continue
        dirs, gaps = _triple([_direction(net, e, v) for v, e in legs])
        c = np.mean([net.points[v] for v, _ in legs], axis=0)
        out.append(Junction("wet", (float(c[0]), float(c[1])), dirs, gaps, float(np.abs(gaps - 120.0).max())))
    return out


def force_balance(net: FilmNetwork) -> float:
    """Largest |sum of multiplicity-weighted unit tangents| over free vertices of degree >= 3."""
    mult = net.edge_multiplicity()
    worst = 0.0
    inc: dict[int, list[int]] = {}
    for e, ch in enumerate(net.edges):
        for v in (int(ch[0]), int(ch[-1])):
            inc.setdefault(v, []).append(e)
    for v, es in inc.items():
        if len(es) < 3 or net.anchor[v] >= 0:
            continue
        f = sum(mult[e] * _direction(net, e, v) for e in es)
        worst = max(worst, float(np.hypot(*f)))
    return worst


# -- density --------------------------------------------------------------------------

@dataclass
class DensityProfile:
    center: tuple[float, float]
    radii: np.ndarray
    ratios: np.ndarray        # mu(B_r) / (2 r)
    monotone: np.ndarray      # e^{Lambda r} mu(B_r) / (2 r)
    flags: np.ndarray         # True where the monotone quantity drops beyond the tolerance
    theta0: float             # min ratio

    @property
    def monotone_ok(self) -> bool:
        return not bool(self.flags.any())


def _distance_to_network(net: FilmNetwork, p) -> float:
    p0, p1 = net.segment_endpoints()
    return min(point_segment_distance(p, a, b) for a, b in zip(p0, p1))


def density_profile(net: FilmNetwork, center, radii: Sequence[float], lam: float | None = None,
                    mono_tol: float = MONO_TOL) -> DensityProfile:
    """Density ratios of the weighted length measure in balls about ``center``."""
    c = np.asarray(center, dtype=float)
    if _distance_to_network(net, c) > 1e-9 * max(net.wire.diameter(), 1.0):
        raise CenterOffNetwork("density centre is not on the network")
    if lam is None:
        est = estimate_lambda(net)
        lam = 0.0 if est is None else est.value
    Lam = abs(lam)
    r = np.asarray(radii, dtype=float)
    mu = np.array([energy_in_disk(net, c, float(x)) for x in r])
    ratio = mu / (2 * r)
    mono = np.exp(Lam * r) * ratio
    flags = np.zeros(len(r), dtype=bool)
    flags[1:] = mono[1:] < mono[:-1] * (1 - mono_tol)
    return DensityProfile((float(c[0]), float(c[1])), r, ratio, mono, flags, float(ratio.min()))


def density_centres(net: FilmNetwork, n: int, rng=None, wet: bool = True, margin: float = 0.0):
    """Random points on wet (or collapsed) edges with their clearance to the wire and to vertices.

    The clearance bounds the radii for which the ball meets only the edge
    and its neighbours.
    """
    rng = np.random.default_rng(rng)
    t = net.topo
    p0, p1 = net.segment_endpoints()
    sel = np.nonzero(t.w == (1.0 if wet else 2.0))[0]
    if len(sel) == 0:
        return []
    L = np.hypot(*(p1 - p0).T)[sel]
    out = []
    w = net.wire
    for s in rng.choice(sel, size=n, p=L / L.sum()):
        c = p0[s] + rng.uniform(0.25, 0.75) * (p1[s] - p0[s])
        gap = float(np.min(np.hypot(*(w.obstacles - c).T)) - w.delta)
        out.append((c, gap))
    return out


# -- convex hull ------------------------------------------------------------------------

def convex_hull_check(net: FilmNetwork, wire: WireFrame, tol: float = HULL_TOL) -> tuple[bool, float]:
    """True when every vertex lies in the convex hull of the wire (up to ``tol``)."""
    from shapely.geometry import MultiPoint, Point

    hull = MultiPoint([tuple(p) for p in wire.obstacles]).convex_hull.buffer(wire.delta, quad_segs=256)
    # the polygonal buffer sits inside the true hull by at most delta (1 - cos(pi / 1024))
    slack = wire.delta * (1 - math.cos(math.pi / 1024))
    worst = 0.0
    for p in net.points:
        q = Point(float(p[0]), float(p[1]))
        if not hull.contains(q):
            worst = max(worst, hull.exterior.distance(q) - slack)
    return worst <= tol, max(worst, 0.0)


# -- measure distance -----------------------------------------------------------------------

def _mass_points(net: FilmNetwork, h: float, weight_scale: float = 1.0):
    t = net.topo
    p0, p1 = net.segment_endpoints()
    pts, wts = [], []
    for a, b, w in zip(p0, p1, t.w):
        L = float(np.hypot(*(b - a)))
        k = max(1, int(np.ceil(L / h)))
        s = (np.arange(k) + 0.5) / k
        pts.append(a + s[:, None] * (b - a))
        wts.append(np.full(k, w * weight_scale * L / k))
    return np.vstack(pts), np.concatenate(wts)


def plateau_distance(net: FilmNetwork, reference: FilmNetwork, bandwidth: float | None = None,
                     reference_weight: float = 1.0) -> float:
    """L1 distance between Gaussian-smoothed weighted length measures.

    The film carries weight 1 on wet edges and 2 on collapsed ones; the
    reference carries its own multiplicities times ``reference_weight``
    (a Plateau network stored as collapsed edges already has weight 2).
    The bandwidth defaults to twice the longest reference segment.
    """
    rp0, rp1 = reference.segment_endpoints()
    if bandwidth is None:
        bandwidth = 2.0 * float(np.hypot(*(rp1 - rp0).T).max())
    sig = bandwidth
    A, wa = _mass_points(net, sig / 32)
    B, wb = _mass_points(reference, sig / 32, reference_weight)
    lo = np.minimum(A.min(0), B.min(0)) - 4 * sig
    hi = np.maximum(A.max(0), B.max(0)) + 4 * sig
    hgrid = sig / 4
    xs = np.arange(lo[0], hi[0] + hgrid, hgrid)
    ys = np.arange(lo[1], hi[1] + hgrid, hgrid)
    G = np.array(np.meshgrid(xs, ys)).reshape(2, -1).T
    pts = np.vstack([A, B])
    wts = np.concatenate([wa, -wb])
    dens = np.zeros(len(G))
    norm = 1.0 / (2 * math.pi * sig * sig)
    for k in range(0, len(pts), 256):
        d2 = ((G[:, None, :] - pts[None, k:k + 256, :]) ** 2).sum(-1)
        dens += (np.exp(-0.5 * d2 / (sig * sig)) * wts[None, k:k + 256]).sum(1)
    return float(np.abs(dens).sum() * norm * hgrid * hgrid)


# -- report --------------------------------------------------------------------------------

@dataclass
class Section:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)


@dataclass
class DiagnosticReport:
    sections: list[Section] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections)

    def to_text(self) -> str:
        out = []
        for s in self.sections:
            out.append(f"[{s.name}] {'pass' if s.passed else 'fail'}")
            for k, v in s.values.items():
                out.append(f"  {k} = {v!r}" if not isinstance(v, str) else f"  {k} = {v}")
        return "\n".join(out) + "\n"


def run_diagnostics(net: FilmNetwork, lam: float | None = None, n_fields: int = 10,
                    n_centres: int = 10, seed: int = 0, reference: FilmNetwork | None = None,
                    el_tol: float = 1e-2, angle_tol: float = 0.5) -> DiagnosticReport:
    """All checks on one converged network."""
    rng = np.random.default_rng(seed)
    est = estimate_lambda(net)
    if lam is None:
        lam = 0.0 if est is None else est.value
    rep = DiagnosticReport()
    fields = random_fields(net, n_fields, rng)
    res = el_residual(net, lam, fields) if fields else 0.0
    rep.sections.append(Section("euler_lagrange", res < el_tol, {"lambda": lam, "residual": res,
                                                                   "fields": len(fields)}))
    if est is not None and est.samples > 0:
        rel = est.std / abs(est.value) if est.value != 0 else 0.0
        rep.sections.append(Section("curvature", rel < 0.02 or est.std < 1e-6,
                                    {"mean": est.value, "std": est.std, "relative_std": rel}))
    js = junction_report(net)
    dev = max((j.deviation_deg for j in js), default=0.0)
    rep.sections.append(Section("junctions", dev < angle_tol, {"count": len(js), "max_deviation_deg": dev}))
    worst_wet, worst_col, mono_ok = math.inf, math.inf, True
    for wet in (True, False):
        for c, gap in density_centres(net, n_centres, rng, wet=wet):
            rmax = 0.5 * gap
            radii = np.geomspace(rmax / 64, rmax, 12)
            prof = density_profile(net, c, radii, lam)
            mono_ok &= prof.monotone_ok
            if wet:
                worst_wet = min(worst_wet, prof.theta0)
            else:
                worst_col = min(worst_col, prof.theta0)
    ok = (worst_wet >= 1 - MONO_TOL or worst_wet == math.inf) and \
         (worst_col >= 2 - MONO_TOL or worst_col == math.inf) and mono_ok
    rep.sections.append(Section("density", ok, {"min_ratio_wet": worst_wet, "min_ratio_collapsed": worst_col,
                                                "monotone": mono_ok}))
    inside, dist = convex_hull_check(net, net.wire)
    rep.sections.append(Section("convex_hull", inside, {"max_violation": dist}))
    if reference is not None:
        d = plateau_distance(net, reference)
        rep.sections.append(Section("plateau_distance", True, {"distance": d}))
    return rep
