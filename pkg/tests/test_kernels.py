import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton import kernels

BACKENDS = kernels.available_backends()


@pytest.fixture(autouse=True)
def restore_backend():
    before = kernels.backend()
    yield
    kernels.use_backend(before)


def test_python_backend_always_available():
    assert "python" in BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def _sum(name, dt, t0, phi0, a, beta2):
    kernels.use_backend(name)
    return kernels.fp_series_sum(dt, t0, phi0, a, beta2)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 0.9999), st.floats(-50.0, 50.0), st.floats(0.05, 5.0))
def test_backends_agree(a, phi0, width):
    t0 = 6.3e-13
    beta2 = (width * t0) ** 2
    dt = np.linspace(-12 * t0, 40 * t0, 777)
    py = _sum("python", dt, t0, phi0, a, beta2)
    cy = _sum("cython", dt, t0, phi0, a, beta2)
    # terms are <= 1 in magnitude and can cancel, so round-off is absolute
    assert np.allclose(cy, py, rtol=1e-13, atol=1e-14)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_transmittance_backends_agree(fp9486):
    omega = np.linspace(2.2e15, 2.35e15, 5001)
    kernels.use_backend("python")
    py = fp9486.transmittance(omega)
    kernels.use_backend("cython")
    assert np.allclose(fp9486.transmittance(omega), py, rtol=1e-13, atol=0)


@pytest.mark.parametrize("name", BACKENDS)
def test_series_against_direct_sum(name):
    t0, phi0, a, beta2 = 1.0, 0.7, 0.95, 0.09
    dt = np.array([-2.3, 0.0, 0.4, 5.0, 17.5])
    n = np.arange(-2000, 2001)
    ref = (a ** np.abs(n) * np.exp(1j * n * phi0)
           * np.exp(-(dt[:, None] - n * t0) ** 2 / (4 * beta2))).sum(axis=1)
    assert np.allclose(_sum(name, dt, t0, phi0, a, beta2), ref, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("name", BACKENDS)
def test_scalar_shape(name):
    out = _sum(name, 0.5, 1.0, 0.0, 0.9, 0.1)
    assert np.shape(out) == ()


def test_half_width_cap():
    k = kernels.series_half_width(np.array([0.0, 1e6]), 1.0, 1e8, 0.999999999)
    assert k.max() <= kernels.MAX_TERMS


def test_fallback_selected_at_import():
    import subprocess
    import sys
    code = "from biphoton import kernels; print(kernels.backend())"
    env = {**__import__("os").environ, "BIPHOTON_BACKEND": "python"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
