import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton.errors import DomainError
from biphoton.hom import (
    HomModel,
    hom_dip_fwhm_path,
    hom_general_quadrature,
    hom_interference_term,
    hom_interference_term_gaussian_profile,
    hom_rate,
    sigma_from_hom_dip_fwhm_path,
)
from biphoton.mzi import beta2_from_widths, envelope_fwhm_airgap
from biphoton.spectra import BiphotonSource, FilterChain, GaussianFilter
from biphoton.units import C, fwhm_wavelength_to_sigma

SIGMA6 = fwhm_wavelength_to_sigma(6.0e-9, 826.2e-9)


def test_sigma_and_dip_width():
    assert SIGMA6 == pytest.approx(9.94e12, rel=1e-3)
    m = HomModel(SIGMA6)
    half = math.sqrt(2 * math.log(2)) / SIGMA6
    assert half == pytest.approx(1.184e-13, rel=1e-3)
    assert hom_interference_term(m, half) == pytest.approx(0.5, rel=1e-14)
    assert hom_dip_fwhm_path(SIGMA6) * 1e6 == pytest.approx(71.0, abs=0.05)
    assert sigma_from_hom_dip_fwhm_path(hom_dip_fwhm_path(SIGMA6)) == pytest.approx(SIGMA6, rel=1e-14)


def test_rate_examples():
    m = HomModel(SIGMA6)
    assert hom_rate(m, 0.0) == 0.0
    assert hom_rate(m, 5 / SIGMA6) == pytest.approx(1.0, abs=4e-6)
    dt = np.linspace(-3e-13, 3e-13, 601)
    assert dt[np.argmin(hom_rate(m, dt))] == 0.0
    assert hom_dip_fwhm_path(1e20) < 1e-10


def test_invalid_sigma():
    with pytest.raises(DomainError):
        HomModel(0.0)


def test_width_relation_exact():
    for sigma in (SIGMA6, 8.78e12, 3e12):
        ratio = hom_dip_fwhm_path(sigma) / envelope_fwhm_airgap(beta2_from_widths(sigma, sigma))
        assert ratio == pytest.approx(0.5, abs=1e-9)


def test_broadband_is_narrower():
    assert hom_dip_fwhm_path(fwhm_wavelength_to_sigma(10e-9, 826.2e-9)) < hom_dip_fwhm_path(SIGMA6)


def test_quadrature_reduces_to_closed_form():
    src = BiphotonSource.degenerate(413.1e-9, 6.0e-9, 6.0e-9)
    m = HomModel.from_source(src)
    assert m.sigma == pytest.approx(SIGMA6, rel=1e-12)
    dt = np.linspace(-4e-13, 4e-13, 41)
    # σ1 = σ2 = σ: ρ = exp(-σ²Δt²/2)
    assert np.allclose(hom_general_quadrature(m, dt), np.exp(-0.5 * (SIGMA6 * dt) ** 2), rtol=0, atol=1e-9)


def test_quadrature_even_and_bounded(source53, fp_chain):
    m = HomModel.from_source(source53, fp_chain)
    dt = np.linspace(0, 4e-12, 37)
    r = hom_general_quadrature(m, dt)
    assert np.allclose(r, hom_general_quadrature(m, -dt), rtol=0, atol=1e-14)
    assert np.all((r >= -1 - 1e-12) & (r <= 1 + 1e-12))


def test_fp_one_arm_regression(source53, fp_chain, fp9486):
    # baselines produced by the quadrature oracle (no published values exist)
    m = HomModel.from_source(source53, fp_chain)
    t0 = fp9486.roundtrip_time
    k = np.array([0, 0.25, 0.5, 1, 1.5])
    r = hom_general_quadrature(m, k * t0)
    base = [0.0908116789268, 0.0150606365459, -0.0515230019771, -6.7400364666e-06, 0.0384226120725]
    assert np.allclose(r, base, rtol=0, atol=1e-9)
    # brute-force Riemann sum on a grid far finer than the FP linewidth
    from biphoton.spectra import biphoton_spectral_density
    sig = source53.sigma_geo1
    nu = np.linspace(-6 * sig, 6 * sig, 2_000_001)
    s = biphoton_spectral_density(source53, fp_chain, FilterChain(), nu)
    w = np.sqrt(s * s[::-1])
    brute = [np.sum(w * np.cos(2 * nu * x * t0)) / np.sum(s) for x in k]
    assert np.allclose(r, brute, rtol=0, atol=1e-6)


def test_offset_filter_closed_form(source53):
    f = GaussianFilter(2 * math.pi * C / 826.4e-9, 3e12)
    chain = FilterChain((f,))
    from biphoton.spectra import gaussian_profile
    prof = gaussian_profile(source53, chain, FilterChain())
    nu_bar = prof.nu_bar - (0.5 * source53.omega_p - source53.omega1_0)
    dt = np.linspace(-1e-12, 1e-12, 21)
    ref = hom_interference_term_gaussian_profile(prof.beta2, nu_bar, dt)
    q = hom_general_quadrature(HomModel.from_source(source53, chain), dt)
    assert np.allclose(q, ref, rtol=0, atol=1e-9)
    assert ref.max() < 1.0


@settings(max_examples=25, deadline=None)
@given(st.floats(1e11, 1e14), st.floats(-1e-12, 1e-12))
def test_closed_form_properties(sigma, dt):
    m = HomModel(sigma)
    r = hom_interference_term(m, dt)
    assert 0 <= r <= 1
    assert r == hom_interference_term(m, -dt)
