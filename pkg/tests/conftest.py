import sys

import pytest

from cutproject.density import invariant_density
from cutproject.inflation import Inflation, omega_q
from cutproject.modelset import Window
from cutproject.ring import QuadraticRing

TAU = (1 + 5**0.5) / 2


@pytest.fixture(scope="session")
def golden():
    return QuadraticRing(1, 1)


@pytest.fixture(scope="session")
def window():
    return Window(-1, 1)


@pytest.fixture(scope="session")
def tau_inflation(golden):
    return Inflation(golden.q)


@pytest.fixture(scope="session")
def omega_tau(window, tau_inflation):
    return omega_q(window, tau_inflation.a_contraction)


@pytest.fixture(scope="session")
def f_inv(window, omega_tau, tau_inflation):
    return invariant_density(window, omega_tau, tau_inflation.a_contraction)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", {})
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])
