"""Kernel dispatch: the compiled extension when built, numpy otherwise.

Set ``CAPFILM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("CAPFILM_PURE_PYTHON"):
    try:
        from ._ext import ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

energy_grad = _impl.energy_grad
energy = _impl.energy
area_grad = _impl.area_grad
area = _impl.area
