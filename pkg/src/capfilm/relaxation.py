"""Area-constrained descent of the relaxed energy.

The descent direction is the energy gradient projected onto the tangent
space of ``{area = epsilon}``, measured in the H1 metric of the current
polyline (the stiffness matrix of sum of ``w |dx|^2 / len`` over segments plus
a small mass term).  The metric only rescales a first-order method: it makes
the step size independent of the sampling density, which otherwise forces
steps of order ``h^2``.  Anchored points move along their circle.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .arrangement import intersecting_pairs
from .film import EnergyBreakdown, FilmNetwork, InvalidNetwork, area, seg_lengths, validate
from .geom2d import TOL_GEOM
from .wireframe import SpanningClass, WireFrame, is_spanning

log = logging.getLogger(__name__)

CSV_COLUMNS = ("epsilon", "energy_F", "boundary_length", "collapsed_length", "lambda",
               "iterations", "spanning_ok", "ell_reference")


class SpanningLost(RuntimeError):
    pass


class NotConverged(RuntimeError):
    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


class InfeasibleVolume(ValueError):
    pass


@dataclass
class SolverOptions:
    step0: float | None = None
    max_iters: int = 50000
    grad_tol: float = 1e-8
    vol_tol: float = 1e-10
    span_check_every: int = 25
    backtrack_factor: float = 0.5
    max_seg_len: float | None = None
    seed: int = 0
    warm_start: bool = True

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "vol_tol", "span_check_every"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.step0 is not None and not self.step0 > 0:
            raise ValueError("step0 must be positive")
        if self.max_seg_len is not None and not self.max_seg_len > 0:
            raise ValueError("max_seg_len must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")


@dataclass
class Gradient:
    """``force`` is minus the energy gradient; ``area_grad`` the area gradient."""

    force: np.ndarray
    area_grad: np.ndarray
    energy: float
    area: float


@dataclass
class LambdaEstimate:
    value: float
    std: float
    samples: int


@dataclass
class RelaxResult:
    network: FilmNetwork
    energy: EnergyBreakdown
    status: str
    iterations: int
    lambda_forces: float
    residual: float
    history: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


# -- gradients ------------------------------------------------------------------

def gradient(net: FilmNetwork) -> Gradient:
    t = net.topo
    P = net.points
    gF = np.zeros_like(P)
    gA = np.zeros_like(P)
    F = kernels.energy_grad(P, t.sa, t.sb, t.w, gF) if len(t.sa) else 0.0
    A = kernels.area_grad(P, t.loop, t.nxt, t.prv, gA) if len(t.loop) else 0.0
    return Gradient(-gF, gA, F, A)


def _radial(net: FilmNetwork, P: np.ndarray):
    idx = np.nonzero(net.anchor >= 0)[0]
    r = P[idx] - net.wire.obstacles[net.anchor[idx]]
    r /= np.hypot(r[:, 0], r[:, 1])[:, None]
    return idx, r


def _tangent_project(v, idx, r):
    v = v.copy()
    v[idx] -= (v[idx] * r).sum(1)[:, None] * r
    return v


def _reproject(net: FilmNetwork, P: np.ndarray) -> np.ndarray:
    idx = np.nonzero(net.anchor >= 0)[0]
    if len(idx):
        c = net.wire.obstacles[net.anchor[idx]]
        v = P[idx] - c
        P[idx] = c + net.wire.delta * v / np.hypot(v[:, 0], v[:, 1])[:, None]
    return P


def _mean_adjacent_length(net: FilmNetwork, P) -> tuple[np.ndarray, np.ndarray]:
    t = net.topo
    d = P[t.sb] - P[t.sa]
    L = np.hypot(d[:, 0], d[:, 1])
    n = len(P)
    tot = np.bincount(t.sa, L, n) + np.bincount(t.sb, L, n)
    cnt = np.bincount(t.sa, None, n) + np.bincount(t.sb, None, n)
    hmin = np.full(n, np.inf)
    np.minimum.at(hmin, t.sa, L)
    np.minimum.at(hmin, t.sb, L)
    return tot / np.maximum(cnt, 1), hmin


TANGENTIAL_WEIGHT = 0.1
LBFGS_MEMORY = 8


class _Metric:
    """Reduced H1 metric; anchored points keep one tangential coordinate."""

    def __init__(self, net: FilmNetwork, P: np.ndarray, scale: float, radial_load=None):
        t = net.topo
        n = len(P)
        d = P[t.sb] - P[t.sa]
        L = np.hypot(d[:, 0], d[:, 1])
        k = t.w / L
        u = d / L[:, None]
        # per-segment 2x2 block: stiff across the segment, soft along it
        blk = (np.eye(2)[None] - (1.0 - TANGENTIAL_WEIGHT) * u[:, :, None] * u[:, None, :]) * k[:, None, None]
        rows, cols, vals = [], [], []
        for (ia, ib, sgn) in ((t.sa, t.sa, 1.0), (t.sb, t.sb, 1.0), (t.sa, t.sb, -1.0), (t.sb, t.sa, -1.0)):
            for p_ in range(2):
                for q_ in range(2):
                    rows.append(2 * ia + p_)
                    cols.append(2 * ib + q_)
                    vals.append(sgn * blk[:, p_, q_])
        h, _ = _mean_adjacent_length(net, P)
        mass = np.repeat(1e-2 * h / scale ** 2, 2)
        M2 = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                           shape=(2 * n, 2 * n)).tocsr() + sp.diags(mass)
        idx, r = _radial(net, P)
        free = np.ones(n, dtype=bool)
        free[idx] = False
        # basis columns: (x, y) for free points, tangent for anchored ones
        bi, bj, bv = [], [], []
        col = 0
        tang = {int(i): (-rr[1], rr[0]) for i, rr in zip(idx, r)}
        for i in range(n):
            if free[i]:
                bi += [2 * i, 2 * i + 1]
                bj += [col, col + 1]
                bv += [1.0, 1.0]
                col += 2
            else:
                tx, ty = tang[i]
                bi += [2 * i, 2 * i + 1]
                bj += [col, col]
                bv += [tx, ty]
                col += 1
        self.B = sp.csr_matrix((bv, (bi, bj)), shape=(2 * n, col))
        self.M2 = M2
        Mr = self.B.T @ M2 @ self.B
        if radial_load is not None and len(idx):
            # sliding on the circle bends the path: curvature term of the
            # constrained Hessian, -(grad L . r) / delta
            cols_a = np.array([self.B.indices[self.B.indptr[2 * i]] for i in idx])
            extra = np.maximum(0.0, -radial_load) / net.wire.delta
            Mr = Mr + sp.csr_matrix((extra, (cols_a, cols_a)), shape=Mr.shape)
        Mr = Mr.tocsc()
        self.lu = splu(Mr)

    def apply_inverse(self, v: np.ndarray) -> np.ndarray:
        """Metric-dual of a covector given per point (n, 2)."""
        z = self.lu.solve(self.B.T @ v.ravel())
        return (self.B @ z).reshape(-1, 2)


def _area_fix(net, P, eps, q, vol_tol, max_newton=8):
    """Newton steps along ``q`` (with radial re-projection) to hit ``eps``."""
    t = net.topo
    gA = np.zeros_like(P)
    for _ in range(max_newton):
        A = kernels.area_grad(P, t.loop, t.nxt, t.prv, gA)
        err = eps - A
        if abs(err) <= 1e-3 * vol_tol * eps:
            return P, True
        slope = float((gA * q).sum())
        if slope <= 0 or not np.isfinite(slope):
            return P, False
        P = P + (err / slope) * q
        _reproject(net, P)
    A = kernels.area(P, t.loop, t.nxt, t.prv)
    return P, abs(eps - A) <= vol_tol * eps


def _energy_change(net: FilmNetwork, P, Q) -> float:
    """F(Q) - F(P) summed segment-wise without cancellation."""
    t = net.topo
    dp = P[t.sb] - P[t.sa]
    dq = Q[t.sb] - Q[t.sa]
    lp = np.hypot(dp[:, 0], dp[:, 1])
    lq = np.hypot(dq[:, 0], dq[:, 1])
    # |q|^2 - |p|^2 = (q - p).(q + p)
    num = ((dq - dp) * (dq + dp)).sum(1)
    return float(np.dot(t.w, num / (lp + lq)))


def _has_crossing(net: FilmNetwork, P) -> bool:
    t = net.topo
    pairs, _, _ = intersecting_pairs(P[t.sa], P[t.sb], TOL_GEOM, skip_shared_endpoints=True)
    if len(pairs):
        return True
    return bool(net.wire.inside(P[net.anchor < 0], tol=1e-12).any())


def _check_state(net: FilmNetwork, P, cls) -> bool:
    trial = net.with_points(P)
    if _has_crossing(net, P):
        return False
    return is_spanning(trial, net.wire, cls, want_witness=False).spanning


def _projected(net, P, gF, gA, liquid):
    """Energy, constrained gradients, multiplier and scaled residual at ``P``."""
    t = net.topo
    F = kernels.energy_grad(P, t.sa, t.sb, t.w, gF)
    idx, r = _radial(net, P)
    g = _tangent_project(gF, idx, r)
    if liquid:
        kernels.area_grad(P, t.loop, t.nxt, t.prv, gA)
        a = _tangent_project(gA, idx, r)
        lam = float((g * a).sum()) / float((a * a).sum())
    else:
        a = np.zeros_like(g)
        lam = 0.0
    d = g - lam * a
    h, hmin = _mean_adjacent_length(net, P)
    res = float(np.max(np.hypot(d[:, 0], d[:, 1]) / h)) if len(h) else 0.0
    return F, g, a, lam, d, res, hmin


def stall_tolerance(grad_tol: float, lam: float, diam: float) -> float:
    """Residual below which a failed line search counts as convergence.

    Once the energy decrease of a step falls below the rounding of the
    coordinates no further progress is representable; the residual reached
    there grows with the curvature scale of the liquid.
    """
    return max(1e3 * grad_tol, math.sqrt(grad_tol) * (1.0 + abs(lam) * diam))


def relax(net: FilmNetwork, wire: WireFrame, cls: SpanningClass, epsilon: float,
          opts: SolverOptions | None = None) -> RelaxResult:
    """Minimise the relaxed energy at fixed area ``epsilon``."""
    opts = opts or SolverOptions()
    if wire is not net.wire and not (np.array_equal(wire.obstacles, net.wire.obstacles)
                                    and wire.delta == net.wire.delta):
        raise ValueError("network was built for a different wire frame")
    bad = validate(net)
    if bad:
        raise InvalidNetwork(bad)
    if not is_spanning(net, wire, cls, want_witness=False):
        raise SpanningLost("initial network does not span the wire frame")
    t = net.topo
    liquid = len(t.loop) > 0
    if epsilon < 0:
        raise InfeasibleVolume("epsilon must be non-negative")
    if epsilon > 0 and not liquid:
        raise InfeasibleVolume("template has no liquid face")
    if epsilon == 0 and liquid:
        raise InfeasibleVolume("epsilon = 0 needs a template without liquid faces")

    diam = wire.diameter()
    trust = opts.step0 if opts.step0 is not None else 1e-2 * diam
    P = net.points.copy()
    _reproject(net, P)

    if liquid:
        metric = _Metric(net, P, diam)
        gA = np.zeros_like(P)
        kernels.area_grad(P, t.loop, t.nxt, t.prv, gA)
        P, ok = _area_fix(net, P, epsilon, metric.apply_inverse(gA), opts.vol_tol, max_newton=50)
        if not ok:
            raise InfeasibleVolume(f"cannot reach area {epsilon:g} from this template")
        if _has_crossing(net, P):
            raise InfeasibleVolume(f"area {epsilon:g} forces a self-intersection of the template")

    gF = np.zeros_like(P)
    gA = np.zeros_like(P)
    F = kernels.energy_grad(P, t.sa, t.sb, t.w, gF)
    last_good, last_good_F, since_check = P.copy(), F, 0
    history = [F]
    lam_e, res = 0.0, np.inf
    status = "max_iters"
    rollbacks = 0
    it = 0
    prev_s = prev_d = None
    memory: list[tuple[np.ndarray, np.ndarray]] = []
    tiny = 0
    for it in range(1, opts.max_iters + 1):
        F, g, a, lam_e, d, res, hmin = _projected(net, P, gF, gA, liquid)
        if res < opts.grad_tol:
            status = "converged"
            break
        idx, r = _radial(net, P)
        load = ((gF[idx] - lam_e * gA[idx]) * r).sum(1) if liquid else (gF[idx] * r).sum(1)
        metric = _Metric(net, P, diam, load)
        za = metric.apply_inverse(a) if liquid else None

        def tangent(v):
            # metric-orthogonal projection onto {grad A . v = 0}
            if za is None:
                return v
            return v - float((a * v).sum()) / float((a * za).sum()) * za

        if prev_s is not None:
            y = d - prev_d
            if float((prev_s * y).sum()) > 1e-300:
                memory.append((prev_s, y))
                if len(memory) > LBFGS_MEMORY:
                    memory.pop(0)
        # two-loop recursion with the metric as initial inverse Hessian
        q = d.copy()
        coef = []
        for s_i, y_i in reversed(memory):
            rho = 1.0 / float((s_i * y_i).sum())
            c = rho * float((s_i * q).sum())
            coef.append((rho, c))
            q -= c * y_i
        r_ = tangent(metric.apply_inverse(q))
        for (s_i, y_i), (rho, c) in zip(memory, reversed(coef)):
            beta = rho * float((y_i * r_).sum())
            r_ += (c - beta) * s_i
        p = -tangent(r_)
        if float((p * d).sum()) >= 0.0:
            memory.clear()
            p = -tangent(metric.apply_inverse(d))
        step = np.hypot(p[:, 0], p[:, 1])
        lim = np.minimum(0.3 * hmin, trust)
        alpha_cap = float(np.min(lim / np.maximum(step, 1e-300)))
        alpha = min(1.0, alpha_cap)
        alpha_try = alpha
        accepted = False
        for _ in range(60):
            Q = _reproject(net, P + alpha * p)
            ok = True
            if liquid:
                Q, ok = _area_fix(net, Q, epsilon, za, opts.vol_tol)
            if ok:
                dF = _energy_change(net, P, Q)
                if liquid:
                    # remove the first-order effect of the residual area error
                    dF -= lam_e * (kernels.area(Q, t.loop, t.nxt, t.prv)
                                   - kernels.area(P, t.loop, t.nxt, t.prv))
                if dF <= 0.0:
                    Fq = F + dF
                    accepted = True
                    break
            alpha *= opts.backtrack_factor
        if not accepted:
            status = "stalled"
            break
        if alpha < 1e-3 * alpha_try:
            # quasi-Newton model is poor here; restart from the metric gradient
            memory.clear()
        if -dF <= 1e-15 * max(abs(F), 1.0):
            tiny += 1
            if tiny >= 20:
                status = "stalled"
                break
        else:
            tiny = 0
        prev_s, prev_d = Q - P, d
        P = Q
        history.append(Fq)
        if alpha >= 0.99 * alpha_try:
            trust = min(2.0 * trust, diam)
        since_check += 1
        if since_check >= opts.span_check_every:
            since_check = 0
            if _check_state(net, P, cls):
                last_good, last_good_F = P.copy(), Fq
            else:
                rollbacks += 1
                if rollbacks > 10:
                    raise SpanningLost("spanning could not be maintained after repeated rollback")
                P = last_good.copy()
                prev_s = prev_d = None
                memory.clear()
                trust *= 0.5
                history.append(last_good_F)
    # final verification
    if not _check_state(net, P, cls):
        if _check_state(net, last_good, cls):
            P = last_good
            status = "rolled_back"
        else:
            raise SpanningLost("final state does not span the wire frame")
    out = net.with_points(P)
    if status == "stalled" and res < stall_tolerance(opts.grad_tol, lam_e, diam):
        # roundoff floor: no representable decrease remains
        status = "converged"
    energy_rec = summarize(out, lam_e)
    result = RelaxResult(out, energy_rec, status, it, lam_e, res, history)
    if status != "converged":
        raise NotConverged(f"relaxation stopped ({status}) after {it} iterations, residual {res:.3g}",
                           result)
    return result


def summarize(net: FilmNetwork, lam: float | None = None) -> EnergyBreakdown:
    L = seg_lengths(net)
    w = net.topo.w
    wet = float(L[w == 1.0].sum())
    col = float(L[w == 2.0].sum())
    if lam is None:
        est = estimate_lambda(net)
        lam = None if est is None else est.value
    return EnergyBreakdown(wet, col, wet + 2 * col, area(net), lam)


# -- multiplier estimate ---------------------------------------------------------

def wet_curvatures(net: FilmNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Discrete curvature and weight at interior samples of wet edges.

    Curvature is the turning angle divided by the mean adjacent segment
    length, positive when the curve turns toward the liquid.
    """
    kap, wts = [], []
    P = net.points
    for face in net.faces:
        for cyc in face:
            for e, dirn in cyc:
                ch = net.edges[e] if dirn > 0 else net.edges[e][::-1]
                if len(ch) < 3:
                    continue
                q = P[ch]
                u = q[1:-1] - q[:-2]
                v = q[2:] - q[1:-1]
                th = np.arctan2(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0], (u * v).sum(1))
                hm = 0.5 * (np.hypot(*u.T) + np.hypot(*v.T))
                kap.append(th / hm)
                wts.append(hm)
    if not kap:
        return np.empty(0), np.empty(0)
    return np.concatenate(kap), np.concatenate(wts)


def estimate_lambda(net: FilmNetwork) -> LambdaEstimate | None:
    k, w = wet_curvatures(net)
    if len(k) == 0:
        return None
    mean = float(np.average(k, weights=w))
    std = float(np.sqrt(np.average((k - mean) ** 2, weights=w)))
    return LambdaEstimate(mean, std, len(k))


# -- warm start -------------------------------------------------------------------

def warm_start(net: FilmNetwork, epsilon: float) -> FilmNetwork:
    """Rescale the liquid toward area ``epsilon``.

    Faces free of anchors are dilated about their centroid by the square
    root of the area ratio, and the collapsed edges leaving them follow with
    a displacement that decays linearly along their length.  Faces touching
    the wire are left to the area projection done by :func:`relax`.
    """
    A = area(net)
    if A <= 0 or epsilon <= 0:
        return net.copy()
    s = math.sqrt(epsilon / A)
    P = net.points.copy()
    disp = np.zeros_like(P)
    moved = np.zeros(len(P), dtype=bool)
    for fi, face in enumerate(net.faces):
        idx = np.unique(np.concatenate([net.cycle_points(c) for c in face]))
        if (net.anchor[idx] >= 0).any():
            continue
        loops = net.face_loops(fi)
        ax = ay = at = 0.0
        for q in loops:
            x, y = q[:, 0], q[:, 1]
            xn, yn = np.roll(x, -1), np.roll(y, -1)
            cr = x * yn - xn * y
            at += cr.sum() / 2
            ax += ((x + xn) * cr).sum() / 6
            ay += ((y + yn) * cr).sum() / 6
        c = np.array([ax / at, ay / at])
        disp[idx] = (c + s * (P[idx] - c)) - P[idx]
        moved[idx] = True
    uses = net.topo.edge_uses
    for e, ch in enumerate(net.edges):
        if uses[e] != 0 or len(ch) < 3 or not (moved[ch[0]] or moved[ch[-1]]):
            continue
        q = P[ch]
        sl = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(q, axis=0).T))])
        f = sl / sl[-1]
        disp[ch[1:-1]] = ((1 - f) * disp[ch[0]][:, None] + f * disp[ch[-1]][:, None]).T[1:-1]
    return net.with_points(P + disp)


# -- sweeps ----------------------------------------------------------------------

@dataclass
class SweepRow:
    epsilon: float
    energy_F: float
    boundary_length: float
    collapsed_length: float
    lam: float
    iterations: int
    spanning_ok: bool
    ell_reference: float
    status: str = "converged"
    network: FilmNetwork | None = field(default=None, repr=False, compare=False)


@dataclass
class SweepFit:
    model: str
    exponent: float
    coefficient: float
    r2: float
    bound_C: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    fit: SweepFit | None
    ell_reference: float
    template: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([repr(r.epsilon), repr(r.energy_F), repr(r.boundary_length),
                        repr(r.collapsed_length), repr(r.lam), r.iterations,
                        "true" if r.spanning_ok else "false", repr(r.ell_reference)])
        return buf.getvalue()


def plateau_reference(tpl, wire: WireFrame, cls: SpanningClass, opts: SolverOptions | None = None):
    """Relax the all-collapsed skeleton; returns (ell, relax result)."""
    from .templates import build_network

    opts = opts or SolverOptions()
    sk = build_network(tpl.skeleton(), wire, 0.0, opts.max_seg_len)
    res = relax(sk, wire, cls, 0.0, opts)
    return res.energy.energy_F / 2.0, res


def fit_scaling(eps: Sequence[float], psi: Sequence[float], ell: float) -> SweepFit | None:
    eps = np.asarray(eps, float)
    psi = np.asarray(psi, float)
    gap = psi - 2 * ell
    C = float(max(0.0, np.max(gap / np.sqrt(eps)))) if len(eps) else 0.0
    ok = np.abs(gap) > 0
    if ok.sum() < 2:
        return None
    x, y = np.log(eps[ok]), np.log(np.abs(gap[ok]))
    slope, icpt = np.polyfit(x, y, 1)
    pred = slope * x + icpt
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(((y - pred) ** 2).sum()) / ss if ss > 0 else 1.0
    model = "quadratic-excess" if np.median(gap) > 0 else "sqrt-deficit"
    return SweepFit(model, float(slope), float(math.exp(icpt)), r2, C)


def sweep(wire: WireFrame, cls: SpanningClass, tpl, epsilons: Sequence[float],
          opts: SolverOptions | None = None, keep_networks: bool = False) -> SweepResult:
    """Relax ``tpl`` over ``epsilons`` (largest first, warm-started)."""
    from .templates import build_network

    opts = opts or SolverOptions()
    eps_sorted = sorted((float(e) for e in epsilons), reverse=True)
    if any(e <= 0 for e in eps_sorted):
        raise ValueError("epsilons must be positive")
    if not eps_sorted:
        return SweepResult([], None, float("nan"), tpl.name)
    ell, _ = plateau_reference(tpl, wire, cls, opts)
    rows: list[SweepRow] = []
    prev: FilmNetwork | None = None
    for eps in eps_sorted:
        if prev is None or not opts.warm_start:
            start = build_network(tpl, wire, eps, opts.max_seg_len)
        else:
            start = warm_start(prev, eps)
        try:
            res = relax(start, wire, cls, eps, opts)
            status = res.status
        except NotConverged as exc:
            res, status = exc.result, "not_converged"
        except (SpanningLost, InfeasibleVolume, InvalidNetwork) as exc:
            log.warning("row eps=%g failed: %s", eps, exc)
            rows.append(SweepRow(eps, math.nan, math.nan, math.nan, math.nan, 0, False, ell,
                                 status=type(exc).__name__))
            prev = None
            continue
        e = res.energy
        rows.append(SweepRow(eps, e.energy_F, e.boundary_length, e.collapsed_length,
                             res.lambda_forces, res.iterations, True, ell, status,
                             res.network if keep_networks else None))
        prev = res.network
    rows.sort(key=lambda r: r.epsilon)
    good = [r for r in rows if r.status == "converged"]
    fit = fit_scaling([r.epsilon for r in good], [r.energy_F for r in good], ell)
    return SweepResult(rows, fit, ell, tpl.name)
