"""SVG rendering of film networks.

The scene is drawn in y-up coordinates: every point is written as
``(x, -y)`` and the view box covers the scene bounds plus a 10% margin.
Wire disks are gray, the liquid is filled, wet edges get a single stroke,
collapsed edges a bold one and witness loops a dashed one.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .film import FilmNetwork

MARGIN = 0.10
DISK_FILL = "#9a9a9a"
LIQUID_FILL = "#a6cee3"
WET_STROKE = "#1f4e79"
COLLAPSED_STROKE = "#000000"
WITNESS_STROKE = "#d62728"


def _f(x: float) -> str:
    return f"{x:.9g}"


def _path(pts: np.ndarray, closed: bool) -> str:
    s = " ".join(f"{_f(x)},{_f(0.0 - y)}" for x, y in pts)
    return f"M {s}{' Z' if closed else ''}"


def scene_bounds(net: FilmNetwork, extra: Sequence[np.ndarray] = ()) -> tuple[float, float, float, float]:
    w = net.wire
    lo = np.min(w.obstacles, axis=0) - w.delta
    hi = np.max(w.obstacles, axis=0) + w.delta
    for arr in [net.points, *extra]:
        if len(arr):
            lo = np.minimum(lo, arr.min(axis=0))
            hi = np.maximum(hi, arr.max(axis=0))
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def render_svg(net: FilmNetwork, witness: Sequence[np.ndarray] = (), title: str | None = None,
               width_px: int = 800) -> str:
    """SVG document of ``net`` and optional witness loops."""
    witness = [np.asarray(l, dtype=float).reshape(-1, 2) for l in witness]
    x0, y0, x1, y1 = scene_bounds(net, witness)
    size = max(x1 - x0, y1 - y0, 1e-12)
    mx, my = MARGIN * max(x1 - x0, size * 1e-3), MARGIN * max(y1 - y0, size * 1e-3)
    vx, vy, vw, vh = x0 - mx, -(y1 + my), (x1 - x0) + 2 * mx, (y1 - y0) + 2 * my
    sw = 0.004 * size
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" '
        f'height="{int(round(width_px * vh / vw))}" viewBox="{_f(vx)} {_f(vy)} {_f(vw)} {_f(vh)}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append('<g id="wire">')
    for c in net.wire.obstacles:
        out.append(f'<circle cx="{_f(c[0])}" cy="{_f(0.0 - c[1])}" r="{_f(net.wire.delta)}" fill="{DISK_FILL}"/>')
    out.append("</g>")
    out.append('<g id="liquid">')
    for fi in range(len(net.faces)):
        d = " ".join(_path(l, True) for l in net.face_loops(fi))
        out.append(f'<path d="{d}" fill="{LIQUID_FILL}" fill-rule="evenodd" stroke="none"/>')
    out.append("</g>")
    uses = net.topo.edge_uses
    out.append('<g id="edges" fill="none" stroke-linecap="round" stroke-linejoin="round">')
    for e in range(len(net.edges)):
        pts = net.edge_points(e)
        if uses[e] == 0:
            out.append(f'<path class="collapsed" d="{_path(pts, False)}" stroke="{COLLAPSED_STROKE}" '
                       f'stroke-width="{_f(2.5 * sw)}"/>')
        else:
            out.append(f'<path class="wet" d="{_path(pts, False)}" stroke="{WET_STROKE}" '
                       f'stroke-width="{_f(sw)}"/>')
    out.append("</g>")
    if witness:
        out.append(f'<g id="witness" fill="none" stroke="{WITNESS_STROKE}" stroke-width="{_f(sw)}" '
                   f'stroke-dasharray="{_f(3 * sw)} {_f(2 * sw)}">')
        for loop in witness:
            out.append(f'<path d="{_path(loop, True)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
