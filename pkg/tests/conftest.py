import numpy as np
import pytest

from biphoton.mzi import MachZehnder, beta2_from_widths
from biphoton.spectra import BiphotonSource, FabryPerotFilter, FilterChain
from biphoton.units import fwhm_wavelength_to_sigma

LAMBDA0 = 826.2e-9
PUMP = 413.1e-9


@pytest.fixture(scope="session")
def sigma53():
    return fwhm_wavelength_to_sigma(5.3e-9, LAMBDA0)


@pytest.fixture(scope="session")
def source53():
    return BiphotonSource.degenerate(PUMP, 5.3e-9, 5.3e-9)


@pytest.fixture(scope="session")
def beta53(sigma53):
    return beta2_from_widths(sigma53, sigma53)


@pytest.fixture(scope="session")
def fp9486():
    return FabryPerotFilter(94.86e-6, 150.0)


@pytest.fixture(scope="session")
def fp_chain(fp9486):
    return FilterChain((fp9486,))


@pytest.fixture(scope="session")
def balanced():
    return MachZehnder(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
