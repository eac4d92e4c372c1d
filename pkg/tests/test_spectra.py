import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton.errors import DomainError
from biphoton.spectra import (
    BiphotonSource,
    FabryPerotFilter,
    FilterChain,
    GaussianFilter,
    biphoton_spectral_density,
    fp_free_spectral_range,
    gaussian_compose,
    gaussian_profile,
    transmittance,
)
from biphoton.units import C, fwhm_wavelength_to_sigma, wavelength_to_angular_frequency

W0 = wavelength_to_angular_frequency(826.2e-9)


def test_gaussian_peak_and_evenness():
    g = GaussianFilter(W0, 8.78e12)
    assert transmittance(g, W0) == 1.0
    d = np.linspace(0, 3e13, 50)
    assert np.allclose(g.transmittance(W0 + d), g.transmittance(W0 - d), rtol=1e-12)
    assert g.transmittance(W0 + 8.78e12) == pytest.approx(math.exp(-1), rel=1e-12)


@pytest.mark.parametrize("kw", [dict(omega0=-1.0, sigma=1e12), dict(omega0=W0, sigma=0.0)])
def test_gaussian_invariants(kw):
    with pytest.raises(DomainError):
        GaussianFilter(**kw)


@pytest.mark.parametrize("kw", [dict(l_f=0.0, finesse=150), dict(l_f=1e-4, finesse=1.0),
                                dict(l_f=1e-4, finesse=150, t_max=0.0), dict(l_f=1e-4, finesse=150, t_max=1.5)])
def test_fp_invariants(kw):
    with pytest.raises(DomainError):
        FabryPerotFilter(**kw)


def test_fp_resonance_and_midpoint(fp9486):
    n = np.round(W0 * fp9486.l_f / (math.pi * C))
    res = n * math.pi * C / fp9486.l_f
    assert fp9486.transmittance(res) == pytest.approx(1.0, rel=1e-12)
    fp = FabryPerotFilter(94.86e-6, 150.0, t_max=0.7)
    mid = (n + 0.5) * math.pi * C / fp.l_f
    assert fp.gamma == pytest.approx(9118.9, rel=1e-5)
    assert fp.transmittance(mid) == pytest.approx(0.7 / (1 + fp.gamma), rel=1e-9)
    assert fp.transmittance(mid) / 0.7 == pytest.approx(1.10e-4, rel=1e-2)


def test_free_spectral_range():
    fp = FabryPerotFilter(95.0e-6, 150.0)
    fsr = fp_free_spectral_range(fp, 826.2e-9)
    assert fsr.omega == pytest.approx(9.91e12, rel=1e-3)
    assert fsr.wavelength == pytest.approx(3.59e-9, rel=1e-3)
    assert fsr.wavelength == pytest.approx(3.6e-9, rel=1e-2)  # published rounded value
    fsr2 = fp_free_spectral_range(FabryPerotFilter(190.0e-6, 150.0), 826.2e-9)
    assert fsr2.wavelength == pytest.approx(fsr.wavelength / 2, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(20e-6, 500e-6), st.floats(1.5, 1000.0))
def test_fp_periodicity(l_f, finesse):
    fp = FabryPerotFilter(l_f, finesse)
    omega = np.random.default_rng(1).uniform(2.0e15, 2.5e15, 100)
    fsr = math.pi * C / l_f
    a, b = fp.transmittance(omega), fp.transmittance(omega + fsr)
    # the sin^2 argument is large (~1e3 rad), so double rounding of omega limits agreement
    assert np.allclose(a, b, rtol=1e-9 * finesse, atol=0)


def test_fp_periodicity_tight(fp9486):
    omega = np.random.default_rng(2).uniform(2.0e15, 2.5e15, 200)
    fsr = math.pi * C / fp9486.l_f
    rel = np.abs(fp9486.transmittance(omega + fsr) / fp9486.transmittance(omega) - 1)
    assert rel.max() < 1e-12 * 1e4  # limited by ulp of ω·l_F/c ≈ 700 rad


@settings(max_examples=30, deadline=None)
@given(st.floats(1e11, 1e14), st.floats(1e11, 1e14))
def test_gaussian_compose_is_product(sa, sb):
    a, b = GaussianFilter(W0, sa), GaussianFilter(W0, sb)
    g = gaussian_compose(a, b)
    omega = W0 + np.random.default_rng(3).normal(0, min(sa, sb), 100)
    assert np.allclose(g.transmittance(omega), a.transmittance(omega) * b.transmittance(omega),
                       rtol=1e-12, atol=1e-300)


def test_gaussian_compose_examples():
    s = 8.78e12
    assert gaussian_compose(GaussianFilter(W0, s), GaussianFilter(W0, s)).sigma == pytest.approx(s / math.sqrt(2), rel=1e-14)
    g = gaussian_compose(GaussianFilter(W0, 8.78e12), GaussianFilter(W0, 2.98e12))
    assert g.sigma == pytest.approx(2.82e12, rel=2e-3)
    assert gaussian_compose(GaussianFilter(W0, s), GaussianFilter(W0, math.inf)).sigma == s
    with pytest.raises(DomainError):
        gaussian_compose(GaussianFilter(W0, s), GaussianFilter(W0 + 1e10, s))


def test_chain_is_product(rng, fp9486):
    g = GaussianFilter(W0, 3e12)
    chain = FilterChain((g, fp9486))
    omega = W0 + rng.uniform(-2e13, 2e13, 200)
    assert np.array_equal(chain.transmittance(omega), g.transmittance(omega) * fp9486.transmittance(omega))
    t = transmittance(chain, omega)
    assert np.all((t >= 0) & (t <= 1))


def test_source_energy_conservation():
    with pytest.raises(DomainError):
        BiphotonSource(4.56e15, 2.28e15, 2.29e15, 1e12, 1e12)
    with pytest.raises(DomainError):
        BiphotonSource(4.56e15, 2.28e15, 2.28e15, -1e12, 1e12)
    s = BiphotonSource.degenerate(413.1e-9, 5.3e-9, 5.3e-9)
    assert s.omega1_0 + s.omega2_0 == s.omega_p
    assert s.signal_wavelength == pytest.approx(826.2e-9, rel=1e-12)


def test_density_examples(source53, sigma53, fp9486):
    empty = FilterChain(())
    assert biphoton_spectral_density(source53, empty, empty, 0.0) == 1.0
    assert biphoton_spectral_density(source53, empty, empty, sigma53) == pytest.approx(math.exp(-2), rel=1e-12)
    nu = np.linspace(-3 * sigma53, 3 * sigma53, 101)
    d = biphoton_spectral_density(source53, empty, empty, nu)
    assert np.allclose(d, d[::-1], rtol=1e-12)
    # midway between FP peaks the density is suppressed by 1/(1+γ)
    n = np.round(source53.omega1_0 * fp9486.l_f / (math.pi * C))
    nu_mid = (n + 0.5) * math.pi * C / fp9486.l_f - source53.omega1_0
    ratio = (biphoton_spectral_density(source53, FilterChain((fp9486,)), empty, nu_mid)
             / biphoton_spectral_density(source53, empty, empty, nu_mid))
    assert ratio == pytest.approx(1.10e-4, rel=1e-2)


def test_gaussian_profile_beta2(source53, sigma53):
    f = GaussianFilter(source53.omega1_0, fwhm_wavelength_to_sigma(1.8e-9, 826.2e-9))
    p = gaussian_profile(source53, FilterChain((f,)), FilterChain(()))
    assert p.beta2 == pytest.approx(2 / sigma53**2 + 1 / f.sigma**2, rel=1e-14)
    assert p.nu_bar == 0.0
