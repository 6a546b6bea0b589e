"""Compare the compiled kernels with the numpy fallback.

Times the weighted-length and area kernels on random networks of growing
size, then one full relaxation per backend (each in a fresh interpreter so
the import-time selection is honoured).

    python3 benchmarks/bench_kernels.py [--sizes 1000 10000 100000] [--repeat 20]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from capfilm import _pykernels

try:
    from capfilm._ext import ckernels
except ImportError:  # extension not built
    ckernels = None

RELAX = """
import time
from capfilm import BACKEND
from capfilm.relaxation import relax
from capfilm.scenario import load_scenario
from capfilm.templates import build_network
sc = load_scenario("triangle")
tpl = sc.template()
net = build_network(tpl, sc.wire, 1e-3, sc.solver.max_seg_len)
t = time.perf_counter()
res = relax(net, sc.wire, sc.spanning, 1e-3, sc.solver)
print(BACKEND, time.perf_counter() - t, res.iterations, repr(res.energy.energy_F))
"""


def problem(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, 2))
    sa = np.arange(n, dtype=np.intp)
    sb = np.roll(sa, -1)
    w = rng.choice([1.0, 2.0], size=n)
    loop = sa.copy()
    return P, sa, sb, w, loop, sb.copy(), np.roll(sa, 1)


def time_kernels(mod, n: int, repeat: int) -> tuple[float, float]:
    P, sa, sb, w, loop, nxt, prv = problem(n)
    g = np.zeros_like(P)
    te = min(timeit.repeat(lambda: mod.energy_grad(P, sa, sb, w, g), number=1, repeat=repeat))
    ta = min(timeit.repeat(lambda: mod.area_grad(P, loop, nxt, prv, g), number=1, repeat=repeat))
    return te, ta


def time_relax(pure: bool) -> str:
    env = dict(os.environ, CAPFILM_PURE_PYTHON="1" if pure else "")
    out = subprocess.run([sys.executable, "-c", RELAX], env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if ckernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'n':>8} {'kernel':>12} {'python_us':>11} {'cython_us':>11} {'speedup':>8}")
    for n in args.sizes:
        py = time_kernels(_pykernels, n, args.repeat)
        cy = time_kernels(ckernels, n, args.repeat)
        for name, a, b in zip(("energy_grad", "area_grad"), py, cy):
            print(f"{n:>8} {name:>12} {a * 1e6:>11.1f} {b * 1e6:>11.1f} {a / b:>8.2f}")
    print()
    print("full relaxation (triangle, eps = 1e-3): backend seconds iterations F")
    for pure in (True, False):
        print(" ", time_relax(pure))
    return 0


if __name__ == "__main__":
    sys.exit(main())
