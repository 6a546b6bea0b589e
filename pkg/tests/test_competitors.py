import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capfilm.competitors import (NoComponent, RegionNotInside, cone_competitor, cone_map, crossing_count,
                                 cup_competitor, energy_in_disk, sample_balls, verify_minimality)
from capfilm.film import FilmNetwork, area, energy, from_polylines, validate
from capfilm.geom2d import Disk2
from capfilm.wireframe import WireFrame

FAR = WireFrame(np.array([[5.0, 5.0]]), 0.1)


def _line(y=0.0):
    return FilmNetwork(FAR, np.array([[-1.0, y], [1.0, y]]), [-1, -1], [[0, 1]])


def _F(net):
    return energy(net, check=False, with_lambda=False).energy_F


class TestMeasure:
    @given(st.floats(0.05, 0.9), st.floats(-0.04, 0.04))
    def test_energy_in_disk_of_a_collapsed_line(self, r, y):
        chord = 2 * math.sqrt(max(r * r - y * y, 0.0))
        assert energy_in_disk(_line(y), (0.0, 0.0), r) == pytest.approx(2 * chord, rel=1e-9, abs=1e-12)

    def test_wet_square_edge(self):
        sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
        net = from_polylines(FAR, [sq], liquid=lambda p: True)
        assert energy_in_disk(net, (0.5, 0.0), 0.2) == pytest.approx(0.4)
        assert crossing_count(net, (0.5, 0.0), 0.2) == 2.0

    def test_crossings_count_multiplicity(self):
        assert crossing_count(_line(), (0.0, 0.0), 0.5) == 4.0
        assert crossing_count(_line(), (0.0, 3.0), 0.5) == 0.0


class TestCone:
    def test_map_fixes_outside_and_squeezes_inside(self):
        f = cone_map((0.0, 0.0), 1.0, 0.01)
        out = f([[2.0, 0.0], [0.5, 0.0], [0.0, 0.0]])
        assert np.allclose(out, [[2.0, 0.0], [0.005, 0.0], [0.0, 0.0]])
        # continuous at the outer radius
        assert np.allclose(f([[1.0, 0.0]]), [[1.0, 0.0]])

    def test_diameter_is_unchanged(self):
        comp = cone_competitor(_line(), Disk2((0.0, 0.0), 0.5), 0.01)
        assert validate(comp) == []
        assert _F(comp) == pytest.approx(4.0, rel=1e-12)

    @given(st.floats(0.05, 0.4))
    def test_off_centre_chord_gets_longer(self, y):
        comp = cone_competitor(_line(y), Disk2((0.0, 0.0), 0.5), 0.005)
        chord = 2 * math.sqrt(0.25 - y * y)
        assert _F(comp) - 4.0 == pytest.approx(2 * (1.0 - chord), rel=0.05)

    def test_rejects(self):
        with pytest.raises(ValueError):
            cone_competitor(_line(), Disk2((0.0, 0.0), 0.5), 0.4)
        with pytest.raises(RegionNotInside):
            cone_competitor(_line(), Disk2((4.8, 5.0), 0.5), 0.01)


class TestCup:
    def test_collapsed_diameter_is_replaced_by_a_longer_collar(self):
        comp = cup_competitor(_line(), Disk2((0.0, 0.0), 0.5), "outside-E")
        assert validate(comp) == []
        assert _F(comp) > 4.0
        assert area(comp) > 0.0

    def test_inside_choice_needs_liquid(self):
        with pytest.raises(NoComponent):
            cup_competitor(_line(), Disk2((0.0, 0.0), 0.5), "inside-E")


class TestMinimality:
    def test_sample_balls(self, lens):
        net = lens.rows[-1].network
        balls = sample_balls(net, 8, rng=5)
        assert balls == sample_balls(net, 8, rng=5)
        w = net.wire
        for b in balls:
            gap = np.min(np.hypot(*(w.obstacles - np.asarray(b.center)).T)) - w.delta
            assert 2 * b.radius < gap
            assert energy_in_disk(net, b.center, b.radius) > 0

    def test_relaxed_lens_has_no_violations(self, lens):
        row = lens.row(1e-3)
        balls = sample_balls(row.network, 4, rng=0)
        rep = verify_minimality(row.network, balls, 1.1 * abs(row.lam), lens.scenario.spanning)
        assert rep.records and not rep.violations
        text = rep.to_text()
        assert text.startswith("# minimality check") and text.count("\n") == len(rep.records) + 1

    def test_kinked_path_is_beaten(self):
        # the cone from a point off the kink cuts the corner
        pts = np.array([[-1.0, 0.0], [0.0, 0.3], [1.0, 0.0]])
        net = FilmNetwork(FAR, pts, [-1] * 3, [[0, 1, 2]])
        rep = verify_minimality(net, [Disk2((0.2, 0.24), 0.4)], 0.0, constructions=("cone",))
        assert [r.verdict for r in rep.records] == ["violation"]
