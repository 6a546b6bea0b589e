"""Shared fixtures: relaxed sweeps of the shipped scenarios, computed once per session."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from capfilm.relaxation import plateau_reference, sweep  # noqa: E402
from capfilm.scenario import load_scenario  # noqa: E402


class Relaxed:
    """One scenario swept over its epsilon schedule, with the Plateau reference."""

    def __init__(self, name: str, template: str | None = None, epsilons=None):
        self.scenario = load_scenario(name)
        self.template = self.scenario.template(template)
        sc = self.scenario
        eps = sc.epsilons if epsilons is None else epsilons
        self.result = sweep(sc.wire, sc.spanning, self.template, eps, sc.solver, keep_networks=True)
        self.ell, ref = plateau_reference(self.template, sc.wire, sc.spanning, sc.solver)
        self.reference = ref.network

    @property
    def rows(self):
        return self.result.rows

    def row(self, eps: float):
        return min(self.rows, key=lambda r: abs(r.epsilon / eps - 1))


@pytest.fixture(scope="session")
def lens():
    return Relaxed("two_points")


@pytest.fixture(scope="session")
def triangle():
    return Relaxed("triangle")


@pytest.fixture(scope="session")
def four_points():
    return Relaxed("four_points")


@pytest.fixture(scope="session")
def six_points():
    return Relaxed("six_points")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[n])
