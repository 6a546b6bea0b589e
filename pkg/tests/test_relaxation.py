import math

import numpy as np
import pytest

from capfilm.film import area, energy
from capfilm.relaxation import (InfeasibleVolume, SolverOptions, SpanningLost, fit_scaling, gradient, relax,
                                stall_tolerance, sweep, warm_start)
from capfilm.scenario import load_scenario
from capfilm.templates import build_network, lens_template
from capfilm.wireframe import SpanningClass, WireFrame
from oracles import lens_energy_exact

TWO = load_scenario("two_points")


def _lens(eps):
    return build_network(lens_template(), TWO.wire, eps, TWO.solver.max_seg_len)


class TestGradient:
    @pytest.mark.parametrize("eps", [0.0, 1e-2])
    def test_matches_finite_differences(self, eps):
        net = _lens(eps)
        rng = np.random.default_rng(1)
        P = net.points + 1e-3 * rng.normal(size=net.points.shape) * (net.anchor < 0)[:, None]
        net = net.with_points(P)
        g = gradient(net)
        h = 1e-6
        for i in rng.choice(len(P), 6, replace=False):
            for k in range(2):
                Q = P.copy()
                Q[i, k] += h
                up = net.with_points(Q.copy())
                Q[i, k] -= 2 * h
                dn = net.with_points(Q)
                dF = (energy(up, False, False).energy_F - energy(dn, False, False).energy_F) / (2 * h)
                dA = (area(up) - area(dn)) / (2 * h)
                assert -g.force[i, k] == pytest.approx(dF, abs=1e-6)
                assert g.area_grad[i, k] == pytest.approx(dA, abs=1e-6)


class TestRelax:
    def test_lens_converges_to_circular_arcs(self):
        res = relax(_lens(1e-2), TWO.wire, TWO.spanning, 1e-2, TWO.solver)
        assert res.converged
        assert res.energy.area == pytest.approx(1e-2, rel=1e-8)
        assert res.energy.energy_F == pytest.approx(lens_energy_exact(0.9, 1e-2), rel=1e-4)
        assert res.history[-1] <= res.history[0]
        # the multiplier from the forces matches the curvature of the arcs
        assert res.lambda_forces == pytest.approx(res.energy.lambda_estimate, rel=1e-2)

    def test_dry_skeleton_is_straight(self):
        res = relax(_lens(0.0), TWO.wire, TWO.spanning, 0.0, TWO.solver)
        assert res.energy.energy_F == pytest.approx(1.8, rel=1e-12)

    def test_volume_errors(self):
        with pytest.raises(InfeasibleVolume):
            relax(_lens(1e-3), TWO.wire, TWO.spanning, -1.0)
        with pytest.raises(InfeasibleVolume):
            relax(_lens(0.0), TWO.wire, TWO.spanning, 1e-3)
        with pytest.raises(InfeasibleVolume):
            relax(_lens(1e-3), TWO.wire, TWO.spanning, 0.0)

    def test_initial_network_must_span(self):
        # a loop around both disks never meets the chord between them
        with pytest.raises(SpanningLost):
            relax(_lens(1e-3), TWO.wire, SpanningClass(((1, 1),)), 1e-3)

    def test_wire_mismatch(self):
        other = WireFrame(TWO.wire.obstacles + 1.0, TWO.wire.delta)
        with pytest.raises(ValueError):
            relax(_lens(1e-3), other, TWO.spanning, 1e-3)

    def test_deterministic(self):
        a = relax(_lens(1e-3), TWO.wire, TWO.spanning, 1e-3, TWO.solver)
        b = relax(_lens(1e-3), TWO.wire, TWO.spanning, 1e-3, TWO.solver)
        assert np.array_equal(a.network.points, b.network.points)


class TestOptions:
    @pytest.mark.parametrize("kw", [{"max_iters": 0}, {"grad_tol": -1.0}, {"backtrack_factor": 1.0},
                                    {"max_seg_len": 0.0}, {"step0": -1.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SolverOptions(**kw)

    def test_stall_tolerance_grows_with_curvature(self):
        assert stall_tolerance(1e-8, 0.0, 1.0) < stall_tolerance(1e-8, 50.0, 1.0)


class TestWarmStart:
    def test_free_face_is_dilated(self, triangle):
        net = triangle.rows[-1].network
        out = warm_start(net, net_area := area(net) / 4)
        assert area(out) == pytest.approx(net_area, rel=1e-9)
        assert np.array_equal(out.points[out.anchor >= 0], net.points[net.anchor >= 0])

    def test_anchored_face_is_left_alone(self, lens):
        net = lens.rows[-1].network
        assert np.array_equal(warm_start(net, 1e-5).points, net.points)


class TestFit:
    def test_quadratic_excess(self):
        eps = np.logspace(-4, -2, 5)
        fit = fit_scaling(eps, 1.8 + 3.0 * eps ** 2, 0.9)
        assert fit.model == "quadratic-excess"
        assert fit.exponent == pytest.approx(2.0)
        assert fit.coefficient == pytest.approx(3.0)
        assert fit.r2 == pytest.approx(1.0)

    def test_sqrt_deficit(self):
        eps = np.logspace(-4, -2, 5)
        fit = fit_scaling(eps, 2.0 - 0.8 * np.sqrt(eps), 1.0)
        assert fit.model == "sqrt-deficit"
        assert fit.exponent == pytest.approx(0.5)
        assert fit.coefficient == pytest.approx(0.8)
        assert fit.bound_C == 0.0

    def test_too_few_points(self):
        assert fit_scaling([1e-3], [1.8], 0.9) is None


class TestSweep:
    def test_rows_sorted_and_converged(self, lens):
        eps = [r.epsilon for r in lens.rows]
        assert eps == sorted(eps)
        assert all(r.status == "converged" and r.spanning_ok for r in lens.rows)
        assert lens.result.ell_reference == pytest.approx(0.9)

    def test_empty(self):
        res = sweep(TWO.wire, TWO.spanning, lens_template(), [], TWO.solver)
        assert res.rows == [] and res.fit is None and math.isnan(res.ell_reference)
        assert res.to_csv().count("\n") == 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            sweep(TWO.wire, TWO.spanning, lens_template(), [1e-3, 0.0])

    def test_cold_start_agrees(self):
        warm = sweep(TWO.wire, TWO.spanning, lens_template(), [1e-2, 1e-3], TWO.solver)
        opts = SolverOptions(max_seg_len=TWO.solver.max_seg_len, warm_start=False)
        cold = sweep(TWO.wire, TWO.spanning, lens_template(), [1e-2, 1e-3], opts)
        for a, b in zip(warm.rows, cold.rows):
            assert a.energy_F == pytest.approx(b.energy_F, rel=1e-7)
