"""Network dumps: a JSON document holding one film network and its wire frame.

Floats are written with ``repr`` so that a dump read back reproduces the
coordinates bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .film import FilmNetwork
from .wireframe import WireFrame

FORMAT = "capfilm-network"
VERSION = 1


class DumpError(ValueError):
    pass


def network_to_dict(net: FilmNetwork, **meta) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "meta": meta,
        "wire": {"obstacles": net.wire.obstacles.tolist(), "delta": float(net.wire.delta)},
        "points": net.points.tolist(),
        "anchor": [int(a) for a in net.anchor],
        "edges": [[int(i) for i in c] for c in net.edges],
        "faces": [[[[int(e), int(d)] for e, d in cyc] for cyc in face] for face in net.faces],
    }


def network_from_dict(d: dict) -> FilmNetwork:
    if d.get("format") != FORMAT:
        raise DumpError(f"not a network dump (format {d.get('format')!r})")
    if d.get("version") != VERSION:
        raise DumpError(f"unsupported dump version {d.get('version')!r}")
    try:
        wire = WireFrame(np.array(d["wire"]["obstacles"], dtype=float), float(d["wire"]["delta"]))
        return FilmNetwork(wire, np.array(d["points"], dtype=float).reshape(-1, 2),
                           np.array(d["anchor"], dtype=np.intp), [np.array(c) for c in d["edges"]],
                           [[[tuple(x) for x in cyc] for cyc in face] for face in d["faces"]])
    except (KeyError, TypeError) as exc:
        raise DumpError(f"malformed dump: {exc}") from None


def dumps(net: FilmNetwork, **meta) -> str:
    return json.dumps(network_to_dict(net, **meta), indent=1) + "\n"


def loads(text: str) -> FilmNetwork:
    return network_from_dict(json.loads(text))


def save(net: FilmNetwork, path, **meta) -> Path:
    p = Path(path)
    p.write_text(dumps(net, **meta))
    return p


def load(path) -> FilmNetwork:
    return loads(Path(path).read_text())


def load_meta(path) -> dict:
    return json.loads(Path(path).read_text()).get("meta", {})
