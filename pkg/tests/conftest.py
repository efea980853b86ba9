import numpy as np
import pytest

from padicqft.green import green_build
from padicqft.lattice import LatticeGeometry
from padicqft.symbols import SymbolSpec, power_polynomial


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_green():
    """Green function of |xi|^2 + 1 on the p=3, N=1, K=1 window."""
    geo = LatticeGeometry(3, 1, 1)
    return green_build(SymbolSpec(power_polynomial(3, 2), 1.0, 1.0), geo)


@pytest.fixture(scope="session")
def wide_green():
    geo = LatticeGeometry(3, 1, 6)
    return green_build(SymbolSpec(power_polynomial(3, 2), 1.0, 1.0), geo)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
