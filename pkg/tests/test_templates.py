import math

import numpy as np
import pytest

from capfilm.film import _loop_area, energy, validate
from capfilm.scenario import load_scenario
from capfilm.templates import (C1, C2, Node, Template, build_network, collapsed_y_template, fermat_point,
                               lens_half_angle, lens_template, tangent_length)
from capfilm.wireframe import is_spanning
from oracles import curvilinear_triangle_constants


def test_constants_match_quadrature():
    a, s = curvilinear_triangle_constants()
    # per unit tangent length the arc radius is sqrt(3)
    assert C1 == pytest.approx(3 * a, rel=1e-10)
    assert C2 == pytest.approx(math.sqrt(3) * s, rel=1e-10)


def test_fermat_point_of_equilateral_triangle():
    pts = [(math.cos(a), math.sin(a)) for a in (0.1, 0.1 + 2 * math.pi / 3, 0.1 + 4 * math.pi / 3)]
    assert np.allclose(fermat_point(*pts), (0.0, 0.0), atol=1e-12)


def test_fermat_point_angles():
    a, b, c = np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([0.5, 1.5])
    s = fermat_point(a, b, c)
    u = [(p - s) / np.hypot(*(p - s)) for p in (a, b, c)]
    for i in range(3):
        assert float(np.dot(u[i], u[(i + 1) % 3])) == pytest.approx(-0.5, abs=1e-9)


def test_lens_half_angle_area():
    chord, area = 0.9, 1e-3
    al = lens_half_angle(area, chord)
    R = chord / (2 * math.sin(al))
    assert R * R * (al - math.sin(al) * math.cos(al)) == pytest.approx(area, rel=1e-10)
    assert lens_half_angle(0.0, chord) == 0.0
    with pytest.raises(ValueError):
        lens_half_angle(10.0, chord)


def test_template_checks():
    nodes = [Node(obstacle=0), Node(obstacle=1), Node(position=(0.5, 0.5))]
    with pytest.raises(ValueError):
        Template("bad", nodes, [(0, 2), (1, 2)], wet_junctions=[2])
    with pytest.raises(ValueError):
        Template("bad", nodes, [(0, 2), (1, 2)], lens_edges=[0])
    assert Template("ok", nodes, [(0, 2), (1, 2)]).n_junctions == 0


@pytest.mark.parametrize("eps", [0.0, 1e-4, 1e-2])
def test_lens_network(eps):
    sc = load_scenario("two_points")
    net = build_network(lens_template(), sc.wire, eps)
    assert validate(net) == []
    e = energy(net, with_lambda=False)
    assert e.area == pytest.approx(eps, rel=2e-3, abs=1e-15)  # chords of the arcs
    assert is_spanning(net, sc.wire, sc.spanning)
    if eps == 0:
        assert e.energy_F == pytest.approx(1.8)


@pytest.mark.parametrize("name", ["triangle", "four_points", "six_points"])
def test_shipped_templates_build_valid_networks(name):
    sc = load_scenario(name)
    for tpl in sc.templates.values():
        for eps in (0.0, sc.epsilons[-1]):
            net = build_network(tpl, sc.wire, eps)
            assert validate(net) == []
            assert energy(net, with_lambda=False).area == pytest.approx(eps, rel=2e-3, abs=1e-15)
            assert is_spanning(net, sc.wire, sc.spanning)


def test_area_split_over_wet_parts():
    sc = load_scenario("four_points")
    tpl = max(sc.templates.values(), key=lambda t: t.n_wet)
    net = build_network(tpl, sc.wire, 1e-3)
    areas = sorted(abs(sum(_loop_area(net.points[net.cycle_points(c)]) for c in f)) for f in net.faces)
    assert areas == pytest.approx([1e-3 / tpl.n_wet] * tpl.n_wet, rel=2e-3)


def test_tangent_length():
    assert tangent_length(C1 * 0.04) == pytest.approx(0.2)
    assert tangent_length(C1 * 0.08, 2) == pytest.approx(0.2)


def test_skeleton_is_dry():
    sc = load_scenario("triangle")
    tpl = collapsed_y_template(sc.wire)
    sk = tpl.skeleton()
    assert sk.n_wet == 0 and sk.edges == tpl.edges
