import math

import numpy as np
import pytest
from scipy import integrate

from biphoton.errors import NumericError
from biphoton.quadrature import GAUSS_WEIGHTS, KRONROD_NODES, KRONROD_WEIGHTS, adaptive_rule


def test_rule_weights_sum():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_exact_polynomials(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert np.dot(KRONROD_WEIGHTS, KRONROD_NODES**deg) == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("f,a,b", [
    (np.exp, 0.0, 1.0),
    (lambda x: np.cos(3 * x) * np.exp(-x * x), -5.0, 5.0),
    (lambda x: 1.0 / (1.0 + 1e4 * x * x), -1.0, 1.0),
])
def test_matches_scipy_quad(f, a, b):
    rule = adaptive_rule(f, [a, b], epsrel=1e-12)
    ref, _ = integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=500)
    assert rule.integrate(f(rule.nodes)) == pytest.approx(ref, rel=1e-11)


def test_lorentzian_comb_with_breakpoints():
    peaks = np.arange(-5, 6) * 1.0
    f = lambda x: np.sum(1.0 / (1.0 + 1e6 * (x[:, None] - peaks) ** 2), axis=1)
    rule = adaptive_rule(f, np.concatenate([[-5.5], peaks, [5.5]]), epsrel=1e-12)
    ref = sum(integrate.quad(lambda x: 1.0 / (1 + 1e6 * (x - p) ** 2), -5.5, 5.5, points=[p],
                             epsabs=0, epsrel=1e-13, limit=500)[0] for p in peaks)
    assert rule.integrate(f(rule.nodes)) == pytest.approx(ref, rel=1e-10)


def test_rule_reuse_for_other_integrand():
    rule = adaptive_rule(lambda x: np.exp(-x * x), [-8.0, 8.0])
    assert rule.integrate(np.exp(-rule.nodes**2)) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_failure_raises_numeric_error():
    with pytest.raises(NumericError):
        adaptive_rule(lambda x: np.sign(x - 1 / 3) / np.sqrt(np.abs(x - 1 / 3) + 1e-300), [0.0, 1.0],
                      max_panels=50)
