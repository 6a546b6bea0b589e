import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capfilm import diagnostics as dg
from capfilm.film import FilmNetwork, area, energy, from_polylines, refine
from capfilm.wireframe import WireFrame

FAR = WireFrame(np.array([[5.0, 5.0]]), 0.1)


def _y(tilt=0.0):
    dirs = [0.0, 2 * math.pi / 3 + tilt, 4 * math.pi / 3]
    pts = [(0.0, 0.0)] + [(math.cos(a), math.sin(a)) for a in dirs]
    return FilmNetwork(FAR, np.array(pts), [-1] * 4, [[0, 1], [0, 2], [0, 3]])


def _field(seed, center=(0.0, 0.0), radius=0.6, degree=2):
    k = len(dg.TestField.monomials(degree))
    return dg.TestField(center, radius, np.random.default_rng(seed).normal(size=(k, 2)), degree)


class TestFields:
    def test_vanishes_outside_support(self):
        X = _field(0)
        assert np.allclose(X([[0.7, 0.0], [0.0, -0.6]]), 0.0)
        assert X.sup_norm() > 0

    def test_coefficient_count(self):
        with pytest.raises(ValueError):
            dg.TestField((0.0, 0.0), 1.0, np.zeros((2, 2)), degree=2)

    def test_support_must_avoid_wire(self):
        with pytest.raises(dg.FieldViolatesBoundaryCondition):
            _field(0, center=(5.0, 4.5), radius=0.6).check(FAR)

    def test_random_fields_are_admissible(self, triangle):
        net = triangle.rows[0].network
        fields = dg.random_fields(net, 8, rng=2)
        assert len(fields) == 8
        for X in fields:
            X.check(net.wire)


@given(st.integers(0, 10 ** 6))
def test_first_variation_and_flux_match_finite_differences(seed):
    sq = np.array([[0.0, 0.0], [0.3, 0.0], [0.3, 0.3], [0.0, 0.3]])
    net = refine(from_polylines(FAR, [np.vstack([sq, sq[:1]]), [(0.3, 0.15), (0.8, 0.2)]],
                                liquid=lambda p: True), 2e-3)
    X = _field(seed, center=(0.25, 0.1), radius=0.4)
    h = 1e-6
    up = net.with_points(net.points + h * X(net.points))
    dn = net.with_points(net.points - h * X(net.points))
    dF = (energy(up, False, False).energy_F - energy(dn, False, False).energy_F) / (2 * h)
    dA = (area(up) - area(dn)) / (2 * h)
    assert dg.first_variation(net, X) == pytest.approx(dF, rel=1e-5, abs=1e-7)
    # midpoint rule against the polygon's exact area change, relative to the gross flux
    assert abs(dg.flux(net, X) - dA) < 1e-4 * dg.flux(net, X, gross=True)


class TestEulerLagrange:
    def test_relaxed_lens_is_stationary(self, lens):
        row = lens.row(1e-3)
        fields = dg.random_fields(row.network, 10, rng=0)
        assert dg.el_residual(row.network, row.lam, fields) < 1e-2

    def test_wrong_multiplier_is_detected(self, triangle):
        for row in (triangle.rows[0], triangle.rows[-1]):
            fields = dg.random_fields(row.network, 10, rng=0)
            good = dg.el_residual(row.network, row.lam, fields)
            assert good < 1e-3
            for wrong in (0.0, 2 * row.lam):
                assert dg.el_residual(row.network, wrong, fields) > 50 * good


class TestJunctions:
    def test_symmetric_y(self):
        js = dg.junction_report(_y())
        assert [j.kind for j in js] == ["dry"]
        assert js[0].deviation_deg == pytest.approx(0.0, abs=1e-9)
        assert js[0].angles_deg.sum() == pytest.approx(360.0)
        assert dg.force_balance(_y()) == pytest.approx(0.0, abs=1e-12)

    def test_tilted_y(self):
        js = dg.junction_report(_y(math.radians(10)))
        assert js[0].deviation_deg == pytest.approx(10.0)
        assert dg.force_balance(_y(math.radians(10))) > 0.1

    def test_wet_junction_of_relaxed_triangle(self, triangle):
        js = dg.junction_report(triangle.rows[0].network)
        assert [j.kind for j in js] == ["wet"]
        assert js[0].deviation_deg < 0.5


class TestDensity:
    def test_collapsed_line(self):
        net = FilmNetwork(FAR, np.array([[-1.0, 0.0], [1.0, 0.0]]), [-1, -1], [[0, 1]])
        prof = dg.density_profile(net, (0.2, 0.0), [0.1, 0.2, 0.4], lam=0.0)
        assert np.allclose(prof.ratios, 2.0)
        assert prof.monotone_ok and prof.theta0 == pytest.approx(2.0)

    def test_centre_must_lie_on_network(self):
        net = _y()
        with pytest.raises(dg.CenterOffNetwork):
            dg.density_profile(net, (0.3, 0.3), [0.1])

    def test_centres_sit_on_wet_edges(self, lens):
        net = lens.rows[0].network
        for c, gap in dg.density_centres(net, 5, rng=1):
            assert dg._distance_to_network(net, c) < 1e-12
            assert gap > 0


class TestHullAndDistance:
    def test_convex_hull(self, lens):
        net = lens.rows[-1].network
        assert dg.convex_hull_check(net, net.wire)[0]
        far = net.with_points(net.points + np.where(net.anchor[:, None] < 0, [0.0, 0.5], 0.0))
        ok, dist = dg.convex_hull_check(far, far.wire)
        assert not ok and dist > 0.3

    def test_plateau_distance(self, lens):
        assert dg.plateau_distance(lens.reference, lens.reference) == pytest.approx(0.0, abs=1e-12)
        small, big = lens.row(1e-4).network, lens.row(1e-2).network
        assert 0 < dg.plateau_distance(small, lens.reference) < dg.plateau_distance(big, lens.reference)


def test_report(lens):
    row = lens.row(1e-3)
    rep = dg.run_diagnostics(row.network, row.lam, reference=lens.reference)
    assert rep.passed
    names = [s.name for s in rep.sections]
    assert names[0] == "euler_lagrange" and names[-1] == "plateau_distance"
    text = rep.to_text()
    assert "[junctions] pass" in text and text.endswith("\n")
