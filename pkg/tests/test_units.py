import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from biphoton.errors import DomainError
from biphoton.units import (
    C,
    PhysicalConstants,
    airgap_to_delay,
    angular_frequency_to_wavelength,
    delay_to_airgap,
    fwhm_wavelength_to_sigma,
    sigma_to_fwhm_wavelength,
    wavelength_to_angular_frequency,
)


def test_speed_of_light_is_exact():
    assert C == 299792458.0
    assert PhysicalConstants().c == C


def test_wavelength_to_frequency_values():
    assert wavelength_to_angular_frequency(826.2e-9) == pytest.approx(2.2799e15, rel=1e-4)
    w = wavelength_to_angular_frequency(413.1e-9)
    assert w == pytest.approx(4.5598e15, rel=1e-4)
    assert w == pytest.approx(2 * wavelength_to_angular_frequency(826.2e-9), rel=1e-15)


def test_sigma_examples():
    s = fwhm_wavelength_to_sigma(5.3e-9, 826.2e-9)
    # independent route: angular FWHM divided by 2 sqrt(ln 2)
    d_omega = 2 * math.pi * C * 5.3e-9 / 826.2e-9**2
    assert d_omega == pytest.approx(1.463e13, rel=1e-3)
    assert s == pytest.approx(d_omega / (2 * math.sqrt(math.log(2))), rel=1e-14)
    assert s == pytest.approx(8.78e12, rel=1e-3)
    assert fwhm_wavelength_to_sigma(1.8e-9, 826.4e-9) == pytest.approx(2.98e12, rel=1e-3)
    assert fwhm_wavelength_to_sigma(10.6e-9, 826.2e-9) == pytest.approx(2 * s, rel=1e-14)


def test_delay_examples():
    assert airgap_to_delay(0.0) == 0.0
    assert airgap_to_delay(160e-6) == pytest.approx(5.34e-13, rel=1e-3)
    assert airgap_to_delay(189.7e-6) == pytest.approx(2 * 94.86e-6 / C, rel=1e-4)
    assert airgap_to_delay(-1e-6) < 0


@pytest.mark.parametrize("bad", [0.0, -1e-9, math.inf, math.nan])
def test_wavelength_domain(bad):
    with pytest.raises(DomainError):
        wavelength_to_angular_frequency(bad)


@pytest.mark.parametrize("args", [(0.0, 826e-9), (1e-9, 0.0), (-1e-9, 826e-9)])
def test_sigma_domain(args):
    with pytest.raises(DomainError):
        fwhm_wavelength_to_sigma(*args)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_delay_domain(bad):
    with pytest.raises(DomainError):
        airgap_to_delay(bad)
    with pytest.raises(DomainError):
        delay_to_airgap(bad)


def test_array_inputs():
    lam = np.array([400e-9, 800e-9, 1600e-9])
    assert np.allclose(angular_frequency_to_wavelength(wavelength_to_angular_frequency(lam)), lam,
                       rtol=1e-14, atol=0)
    with pytest.raises(DomainError):
        wavelength_to_angular_frequency(np.array([800e-9, -1.0]))


@given(st.floats(1e-7, 1e-5))
def test_wavelength_roundtrip(lam):
    assert angular_frequency_to_wavelength(wavelength_to_angular_frequency(lam)) == pytest.approx(lam, rel=1e-12)


@given(st.floats(1e-11, 5e-8), st.floats(3e-7, 2e-6))
def test_sigma_roundtrip(dl, lam0):
    assert sigma_to_fwhm_wavelength(fwhm_wavelength_to_sigma(dl, lam0), lam0) == pytest.approx(dl, rel=1e-12)


@given(st.floats(-1.0, 1.0))
def test_delay_roundtrip(l):
    assert delay_to_airgap(airgap_to_delay(l)) == pytest.approx(l, rel=1e-12, abs=1e-300)
