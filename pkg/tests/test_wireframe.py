import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capfilm.wireframe import (SpanningClass, WireFrame, achievable_parities, build_region_graph, f2_in_span,
                               f2_reduce, f2_solve, is_spanning, network_clearance)
from oracles import grid_spans, random_instance

TWO = WireFrame(np.array([[0.0, 0.0], [1.0, 0.0]]), 0.05)
CHORD = (np.array([[0.05, 0.0]]), np.array([[0.95, 0.0]]))
EMPTY = (np.empty((0, 2)), np.empty((0, 2)))


def _loop_segments(loop):
    loop = np.asarray(loop, float)
    return loop, np.roll(loop, -1, axis=0)


def _span(basis, m):
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(basis)):
        v = [0] * m
        for c, b in zip(coeffs, basis):
            if c:
                v = [x ^ y for x, y in zip(v, b)]
        out.add(tuple(v))
    return out


class TestWireFrame:
    def test_basic(self):
        assert TWO.m == 2
        assert TWO.diameter() == pytest.approx(1.1)
        assert TWO.anchor_of((0.05, 0.0)) == 0
        assert TWO.anchor_of((0.5, 0.0)) == -1
        assert np.allclose(TWO.project((3.0, 0.0), 1), (1.05, 0.0))
        assert TWO.inside([(0.0, 0.01), (0.5, 0.0)]).tolist() == [True, False]

    @pytest.mark.parametrize("obs, delta", [([[0, 0], [0.05, 0]], 0.05), ([[0, 0]], 0.0), ([[np.nan, 0]], 0.1)])
    def test_rejects_bad_frames(self, obs, delta):
        with pytest.raises(ValueError):
            WireFrame(np.array(obs, float), delta)


class TestSpanningClass:
    def test_singletons(self):
        assert SpanningClass.singletons(3).generators == ((1, 0, 0), (0, 1, 0), (0, 0, 1))

    @pytest.mark.parametrize("gens", [(), ((0, 0),), ((1, 0), (1, 0)), ((1, 0), (1, 0, 1))])
    def test_rejects(self, gens):
        with pytest.raises(ValueError):
            SpanningClass(gens)


class TestF2:
    @given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), max_size=8))
    def test_reduce_spans_input(self, vecs):
        basis = f2_reduce(vecs, 4)
        span = _span(basis, 4)
        assert all(tuple(v) in span for v in vecs)
        assert len(span) == 2 ** len(basis)  # independent

    @given(st.lists(st.lists(st.integers(0, 1), min_size=5, max_size=5), min_size=1, max_size=6),
           st.lists(st.integers(0, 1), min_size=5, max_size=5))
    def test_solve(self, vecs, target):
        idx = f2_solve(target, vecs)
        in_span = tuple(target) in _span(f2_reduce(vecs, 5), 5)
        assert (idx is not None) == in_span == f2_in_span(target, vecs)
        if idx is not None:
            acc = [0] * 5
            for i in idx:
                acc = [a ^ b for a, b in zip(acc, vecs[i])]
            assert acc == list(target)


class TestRegionGraph:
    def test_empty_network_one_obstacle(self):
        g = build_region_graph(EMPTY, WireFrame(np.array([[0.0, 0.0]]), 0.1))
        assert g.n_faces == 1
        assert achievable_parities(g) == [[(1,)]]

    def test_empty_network_two_obstacles(self):
        bases = achievable_parities(build_region_graph(EMPTY, TWO))
        assert len(bases) == 1
        assert _span(bases[0], 2) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_chord_between_disks(self):
        bases = achievable_parities(build_region_graph(CHORD, TWO))
        assert [_span(b, 2) for b in bases] == [{(0, 0), (1, 1)}]

    def test_circle_around_single_disk(self):
        wire = WireFrame(np.array([[0.0, 0.0]]), 0.1)
        t = np.linspace(0, 2 * math.pi, 48, endpoint=False)
        circ = np.stack([0.5 * np.cos(t), 0.5 * np.sin(t)], axis=1)
        g = build_region_graph(_loop_segments(circ), wire)
        assert g.n_faces == 2
        # the annulus between the circle and the disk still carries a loop around the disk
        spans = sorted(_span(b, 1) for b in achievable_parities(g))
        assert {(0,), (1,)} in spans


class TestIsSpanning:
    def test_chord_blocks_single_disks(self):
        assert is_spanning(CHORD, TWO, SpanningClass(((1, 0), (0, 1))))

    def test_chord_misses_pair_with_witness(self):
        res = is_spanning(CHORD, TWO, SpanningClass(((1, 1),)))
        assert not res.spanning
        assert res.violated == (1, 1)
        assert res.witness
        # the witness loops avoid the network and together wind around both disks
        from capfilm.geom2d import ray_crossing_parity, segment_intersect, Crossing

        par = [sum(ray_crossing_parity(l, c, (0.0, 1.0)) for l in res.witness) % 2 for c in TWO.obstacles]
        assert par == [1, 1]
        for l in res.witness:
            for a, b in zip(l[:-1], l[1:]):
                assert segment_intersect((a, b), (CHORD[0][0], CHORD[1][0])).kind is Crossing.NONE

    def test_empty_network_never_spans(self):
        for g in [(1, 0), (0, 1), (1, 1)]:
            assert not is_spanning(EMPTY, TWO, SpanningClass((g,)))

    def test_class_size_mismatch(self):
        with pytest.raises(ValueError):
            is_spanning(CHORD, TWO, SpanningClass(((1, 0, 0),)))

    def test_film_network_input(self, lens):
        net = lens.row(1e-3).network
        assert is_spanning(net, net.wire, lens.scenario.spanning)


def _classes(m):
    return [g for g in itertools.product((0, 1), repeat=m) if any(g)]


def _spans(p0, p1, wire):
    return [is_spanning((p0, p1), wire, SpanningClass((g,)), want_witness=False).spanning for g in _classes(wire.m)]


seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds, st.integers(1, 4))
def test_refinement_invariance(seed, k):
    wire, p0, p1 = random_instance(np.random.default_rng(seed), 1.5 / 320)
    q0, q1 = [], []
    for a, b in zip(p0, p1):
        pts = [a + (b - a) * j / (k + 1) for j in range(k + 2)]
        q0 += pts[:-1]
        q1 += pts[1:]
    assert _spans(p0, p1, wire) == _spans(np.array(q0), np.array(q1), wire)


@given(seeds, st.data())
def test_adding_edges_keeps_spanning(seed, data):
    wire, p0, p1 = random_instance(np.random.default_rng(seed), 1.5 / 320)
    keep = data.draw(st.lists(st.booleans(), min_size=len(p0), max_size=len(p0)))
    sub = np.array(keep, bool)
    small = _spans(p0[sub], p1[sub], wire) if sub.any() else [False] * len(_classes(wire.m))
    full = _spans(p0, p1, wire)
    assert all(f or not s for s, f in zip(small, full))


@given(seeds, seeds)
def test_small_perturbation_is_stable(seed, pseed):
    wire, p0, p1 = random_instance(np.random.default_rng(seed), 1.5 / 320)
    mu = network_clearance((p0, p1), wire)
    rng = np.random.default_rng(pseed)
    ends = np.unique(np.vstack([p0, p1]), axis=0)
    moved = {}
    for q in ends:
        if wire.anchor_of(q, tol=1e-12) >= 0:
            moved[tuple(q)] = q  # anchored ends stay on their circle
        else:
            d = rng.normal(size=2)
            moved[tuple(q)] = q + 0.2 * min(mu, 0.05) * d / np.hypot(*d)
    q0 = np.array([moved[tuple(a)] for a in p0])
    q1 = np.array([moved[tuple(b)] for b in p1])
    assert _spans(p0, p1, wire) == _spans(q0, q1, wire)


def test_agrees_with_grid_oracle_sample():
    rng = np.random.default_rng(77)
    for _ in range(15):
        wire, p0, p1 = random_instance(rng, 1.5 / 320)
        for g, ours in zip(_classes(wire.m), _spans(p0, p1, wire)):
            assert ours == grid_spans(p0, p1, wire, g)
