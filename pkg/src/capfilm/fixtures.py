"""Construction of the shipped scenario files.

The four- and six-point frames are placed so that two skeletons with a
different number of Y junctions have exactly the same length.  Run
``python3 -m capfilm.fixtures DIR`` to regenerate the files.
"""

from __future__ import annotations

import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

DELTA = 0.02
SOLVER = {"max_seg_len": 0.05}
SWEEP = {"values": [1e-5], "logspace": {"start": 1e-4, "stop": 1e-2, "num": 9}}


def _u(deg):
    a = math.radians(deg)
    return np.array([math.cos(a), math.sin(a)])


def _node(p):
    return {"position": [float(p[0]), float(p[1])]}


def two_points() -> dict:
    return {
        "name": "two_points",
        "description": "Two disks one unit apart; the film is a lens pinned to both disks.",
        "wire": {"obstacles": [[0.0, 0.0], [1.0, 0.0]], "delta": 0.05},
        "spanning": {"generators": [[1, 0], [0, 1]]},
        "templates": {"lens": {"kind": "lens", "obstacles": [0, 1]}},
        "default_template": "lens",
        "epsilons": SWEEP,
        "solver": SOLVER,
    }


def triangle() -> dict:
    r = 1 / math.sqrt(3)
    obs = [[r * math.cos(a), r * math.sin(a)] for a in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)]
    return {
        "name": "triangle",
        "description": "Equilateral triangle of side 1; liquid wets the central Y junction.",
        "wire": {"obstacles": obs, "delta": 0.02},
        "spanning": {"generators": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        "templates": {"collapsed_y": {"kind": "collapsed_y", "obstacles": [0, 1, 2]}},
        "default_template": "collapsed_y",
        "epsilons": SWEEP,
        "solver": SOLVER,
    }


def four_points(h: float = 0.5) -> dict:
    """Rectangle of sides h x sqrt(3) h.

    The two horizontal sides and the H-shaped Steiner tree both have length
    2 w (with w = sqrt(3) h) once each leg is shortened by delta.
    """
    w = math.sqrt(3) * h
    obs = [[0.0, 0.0], [0.0, h], [w, 0.0], [w, h]]
    x = h / (2 * math.sqrt(3))
    nodes = [{"obstacle": i} for i in range(4)] + [_node((x, h / 2)), _node((w - x, h / 2))]
    h_edges = [[4, 0], [4, 1], [4, 5], [5, 2], [5, 3]]
    rails = {"kind": "skeleton", "nodes": [{"obstacle": i} for i in range(4)],
             "edges": [[0, 2], [1, 3]], "lens_edges": [0]}
    return {
        "name": "four_points",
        "description": (f"Rectangle h = {h}, w = sqrt(3) h: parallel sides (no junction) and the H tree "
                        "(two junctions) have equal length. Loops around any single disk or around "
                        "the left pair must be blocked."),
        "wire": {"obstacles": obs, "delta": DELTA},
        "spanning": {"generators": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 0, 0]]},
        "templates": {
            "rails": rails,
            "h_one": {"kind": "skeleton", "nodes": nodes, "edges": h_edges, "wet_junctions": [4]},
            "h_two": {"kind": "skeleton", "nodes": nodes, "edges": h_edges, "wet_junctions": [4, 5]},
        },
        "default_template": "h_two",
        "epsilons": {"values": [1e-5, 1e-4, 1e-3]},
        "solver": SOLVER,
    }


def _six_geometry(b, scale):
    """Terminals and junctions of the four-junction tree with bridge ``b``.

    Unit leg lengths, 120 degree angles everywhere, symmetric under the
    half turn.  Returned coordinates are multiplied by ``scale``.
    """
    S2 = np.array([-b / 2, 0.0])
    S1 = S2 + _u(120)
    p2 = S2 + _u(240)
    p0 = S1 + _u(60)
    p1 = S1 + _u(180)
    P = np.array([p0, p1, p2, -p2, -p1, -p0])
    S = np.array([S1, S2, -S2, -S1])
    return P * scale, S * scale


def _six_lengths(b, scale, delta):
    P, S = _six_geometry(b, scale)
    tree = (b + 2 * (1 + 1 + 2)) * scale - 6 * delta
    L = lambda i, j: float(np.hypot(*(P[i] - P[j])))
    rails = L(0, 3) + L(3, 4) + L(1, 2) + L(2, 5) - 8 * delta
    return tree, rails


def six_points(scale: float = 0.2) -> dict:
    """Six disks carrying a four-junction tree and two bent rails of equal length.

    The bridge length is found by root finding so that the tree (four Y
    junctions) and the two paths 0-3-4 and 1-2-5 (no junction) have the
    same total length.  The class contains every parity pattern except
    those realisable by loops around the two rails, so both networks span.
    """
    f = lambda b: np.subtract(*_six_lengths(b, scale, DELTA)[::-1])
    b = brentq(f, 1.0, 5.0, xtol=1e-15)
    P, S = _six_geometry(b, scale)
    allowed = {(1, 0, 0, 1, 1, 0), (0, 1, 1, 0, 0, 1), (1, 1, 1, 1, 1, 1)}
    gens = [list(v) for v in itertools.product((0, 1), repeat=6) if any(v) and v not in allowed]
    term = [{"obstacle": i} for i in range(6)]
    nodes = term + [_node(s) for s in S]
    # junction k sits at index 6 + k: S1(0,1), S2(2), S3(3), S4(4,5)
    t_edges = [[6, 0], [6, 1], [6, 7], [7, 2], [7, 8], [8, 3], [8, 9], [9, 4], [9, 5]]
    rails = {"kind": "skeleton", "nodes": term, "edges": [[0, 3], [3, 4], [1, 2], [2, 5]], "lens_edges": [0]}
    return {
        "name": "six_points",
        "description": (f"Four-junction tree (unit legs, bridge {b:.12f}, scale {scale}) versus two bent "
                        "paths 0-3-4 and 1-2-5 of equal length; bridge found by root finding."),
        "wire": {"obstacles": P.round(15).tolist(), "delta": DELTA},
        "spanning": {"generators": gens},
        "templates": {
            "rails": rails,
            "tree_one": {"kind": "skeleton", "nodes": nodes, "edges": t_edges, "wet_junctions": [6]},
            "tree_two": {"kind": "skeleton", "nodes": nodes, "edges": t_edges, "wet_junctions": [6, 9]},
            "tree_four": {"kind": "skeleton", "nodes": nodes, "edges": t_edges,
                          "wet_junctions": [6, 7, 8, 9]},
        },
        "default_template": "tree_four",
        "epsilons": {"values": [1e-5, 1e-4, 1e-3]},
        "solver": SOLVER,
    }


ALL = {"two_points": two_points, "triangle": triangle, "four_points": four_points, "six_points": six_points}


def render(d: dict) -> str:
    return json.dumps(d, indent=2) + "\n"


def write_all(directory) -> list[Path]:
    out = []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, fn in ALL.items():
        p = directory / f"{name}.scenario"
        p.write_text(render(fn()))
        out.append(p)
    return out


if __name__ == "__main__":  # pragma: no cover
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "scenarios"):
        print(p)
