"""Planar liquid films: relaxed soap-film energies with a small liquid area.

A film is a network of polylines around a wire frame of small disks.  Wet
edges bound liquid faces and count once; collapsed edges count twice.  The
package relaxes such networks at fixed liquid area, builds the competitors
used to check minimality and measures the diagnostic quantities of a
minimiser.
"""

from .film import EnergyBreakdown, FilmNetwork, InvalidNetwork, area, energy, validate
from .kernels import BACKEND
from .relaxation import RelaxResult, SolverOptions, relax, sweep
from .scenario import ParseError, Scenario, SchemaError, load_scenario
from .templates import build_network
from .wireframe import SpanningClass, WireFrame, is_spanning

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EnergyBreakdown", "FilmNetwork", "InvalidNetwork", "ParseError", "RelaxResult",
    "Scenario", "SchemaError", "SolverOptions", "SpanningClass", "WireFrame", "area",
    "build_network", "energy", "is_spanning", "load_scenario", "relax", "sweep", "validate",
]
