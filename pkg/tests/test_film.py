import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capfilm.film import FilmNetwork, InvalidNetwork, area, energy, from_polylines, refine, validate
from capfilm.templates import build_network, collapsed_y_template, tangent_length
from capfilm.wireframe import WireFrame
from oracles import lens_energy

FAR = WireFrame(np.array([[5.0, 5.0]]), 0.1)
SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _square_net(liquid=True):
    return from_polylines(FAR, [np.vstack([SQUARE, SQUARE[:1]])], liquid=(lambda p: True) if liquid else None)


def _y_net():
    pts = [(0.0, 0.0), (1.0, 0.0), (-0.5, math.sqrt(3) / 2), (-0.5, -math.sqrt(3) / 2)]
    return FilmNetwork(FAR, np.array(pts), [-1] * 4, [[0, 1], [0, 2], [0, 3]])


def _even_odd(samples, loop):
    x, y = samples[:, 0:1], samples[:, 1:2]
    a, b = loop, np.roll(loop, -1, axis=0)
    up = (a[:, 1] <= y) != (b[:, 1] <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    return ((up & (xc > x)).sum(1) % 2).astype(bool)


def _moved(net, th, shift):
    c, s = math.cos(th), math.sin(th)
    R = np.array([[c, -s], [s, c]])
    wire = WireFrame(net.wire.obstacles @ R.T + shift, net.wire.delta)
    return FilmNetwork(wire, net.points @ R.T + shift, net.anchor, net.edges, net.faces)


class TestEnergy:
    def test_unit_square_with_liquid(self):
        e = energy(_square_net(), with_lambda=False)
        assert e.boundary_length == pytest.approx(4.0)
        assert e.collapsed_length == 0.0
        assert e.energy_F == pytest.approx(4.0)
        assert e.area == pytest.approx(1.0)

    def test_dry_square_is_collapsed(self):
        e = energy(_square_net(liquid=False), with_lambda=False)
        assert e.collapsed_length == pytest.approx(4.0)
        assert e.energy_F == pytest.approx(8.0)
        assert e.area == 0.0

    def test_y_of_unit_segments(self):
        e = energy(_y_net(), with_lambda=False)
        assert e.energy_F == pytest.approx(6.0)
        assert e.boundary_length == 0.0

    def test_tangent_arc_triangle_area(self):
        wire = WireFrame(np.array([[math.cos(a), math.sin(a)] for a in (0.3, 2.4, 4.5)]) * 2.0, 0.05)
        t = 0.1
        eps = 3 * (math.sqrt(3) - math.pi / 2) * t * t
        assert eps == pytest.approx(0.0048376, abs=1e-7)
        assert tangent_length(eps) == pytest.approx(t)
        tpl = collapsed_y_template(wire)
        tpl.arc_segments = 256
        net = build_network(tpl, wire, eps)
        e = energy(net, with_lambda=False)
        assert e.area == pytest.approx(eps, rel=1e-12)
        # three collapsed legs shortened by t, three arcs of length pi R / 3 with R = sqrt(3) t
        dry = build_network(tpl, wire, 0.0)
        legs = energy(dry, with_lambda=False).collapsed_length - 3 * t
        assert e.collapsed_length == pytest.approx(legs, rel=1e-5)
        assert e.boundary_length == pytest.approx(math.sqrt(3) * math.pi * t, rel=1e-4)

    def test_lens_matches_closed_form(self, lens):
        net = lens.row(1e-3).network
        e = energy(net, with_lambda=False)
        assert e.area == pytest.approx(1e-3, rel=1e-8)
        assert e.energy_F == pytest.approx(lens_energy(0.9, 1e-3), rel=2e-6)

    def test_invalid_network_raises(self):
        net = FilmNetwork(FAR, np.array([[4.95, 5.0], [0.0, 0.0]]), [-1, -1], [[0, 1]])
        with pytest.raises(InvalidNetwork):
            energy(net)

    @given(st.floats(0, 2 * math.pi), st.floats(-50, 50), st.floats(-50, 50))
    def test_rigid_motion_invariant(self, th, dx, dy):
        for net in (_square_net(), _y_net()):
            a, b = energy(net, with_lambda=False), energy(_moved(net, th, (dx, dy)), with_lambda=False)
            assert b.energy_F == pytest.approx(a.energy_F, abs=1e-10)
            assert b.area == pytest.approx(a.area, abs=1e-10)

    def test_area_agrees_with_monte_carlo(self, triangle):
        net = triangle.row(triangle.rows[0].epsilon).network
        loops = [net.points[net.cycle_points(c)] for f in net.faces for c in f]
        lo = np.vstack(loops).min(0)
        hi = np.vstack(loops).max(0)
        rng = np.random.default_rng(3)
        n = 20000
        samples = lo + rng.random((n, 2)) * (hi - lo)
        hits = np.zeros(n, bool)
        for l in loops:
            hits ^= _even_odd(samples, l)
        hits = int(hits.sum())
        mc = hits / n * float(np.prod(hi - lo))
        sigma = float(np.prod(hi - lo)) * math.sqrt(0.25 / n)
        assert abs(mc - area(net)) < 4 * sigma


class TestValidate:
    def test_good_networks(self, lens):
        assert validate(_square_net()) == []
        assert validate(_y_net()) == []
        assert validate(lens.row(1e-3).network) == []

    def test_vertex_in_wire(self):
        net = FilmNetwork(FAR, np.array([[5.0, 5.01], [0.0, 0.0]]), [-1, -1], [[0, 1]])
        assert "VertexInWire" in {v.kind for v in validate(net)}

    def test_edge_crossing(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        net = FilmNetwork(FAR, pts, [-1] * 4, [[0, 1], [2, 3]])
        assert [v.kind for v in validate(net)] == ["EdgeCrossing"]

    def test_edge_through_wire(self):
        pts = np.array([[4.0, 5.0], [6.0, 5.0]])
        net = FilmNetwork(FAR, pts, [-1, -1], [[0, 1]])
        assert [v.kind for v in validate(net)] == ["EdgeInWire"]

    def test_anchor_off_circle(self):
        net = FilmNetwork(FAR, np.array([[5.2, 5.0], [0.0, 0.0]]), [0, -1], [[0, 1]])
        assert [v.kind for v in validate(net)] == ["AnchorOffCircle"]

    def test_open_face(self):
        net = FilmNetwork(FAR, SQUARE, [-1] * 4, [[0, 1, 2], [2, 3]], [[[(0, 1)]]])
        assert "FaceNotClosed" in {v.kind for v in validate(net)}


class TestRefine:
    def test_unit_segment(self):
        net = FilmNetwork(FAR, np.array([[0.0, 0.0], [1.0, 0.0]]), [-1, -1], [[0, 1]])
        out = refine(net, 0.25)
        assert len(out.edges[0]) == 5
        assert np.allclose(out.points[out.edges[0]][:, 0], [0, 0.25, 0.5, 0.75, 1.0])

    def test_coarse_limit_is_identity(self):
        net = _square_net()
        out = refine(net, 10.0)
        assert np.array_equal(out.points, net.points)
        assert [c.tolist() for c in out.edges] == [c.tolist() for c in net.edges]

    def test_preserves_energy(self, lens):
        net = lens.row(1e-3).network
        a, b = energy(net, with_lambda=False), energy(refine(net, 0.01), with_lambda=False)
        assert abs(a.energy_F - b.energy_F) < 1e-12
        assert abs(a.area - b.area) < 1e-12
        assert validate(refine(net, 0.01)) == []


class TestFromPolylines:
    def test_crossing_lines_become_a_plus(self):
        net = from_polylines(FAR, [[(-1, 0), (1, 0)], [(0, -1), (0, 1)]])
        assert len(net.edges) == 4
        assert max(net.degree().values()) == 4
        assert energy(net, with_lambda=False).energy_F == pytest.approx(8.0)

    def test_liquid_predicate_selects_faces(self):
        lines = [np.vstack([SQUARE, SQUARE[:1]]), [(0.5, 0.0), (0.5, 1.0)]]
        net = from_polylines(FAR, lines, liquid=lambda p: p[0] < 0.5)
        e = energy(net, with_lambda=False)
        assert e.area == pytest.approx(0.5)
        assert e.boundary_length == pytest.approx(3.0)
        assert e.collapsed_length == pytest.approx(2.0)
