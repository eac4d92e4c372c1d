"""Headline quantities read off computed or measured curves."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .mzi import InterferenceModel, local_visibility
from .units import airgap_to_delay


def half_max_width(x, y, peak_index=None):
    """Full width at half maximum of a single peak by linear interpolation."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    k = int(np.argmax(y)) if peak_index is None else peak_index
    half = 0.5 * y[k]
    left = np.nonzero(y[:k] < half)[0]
    right = np.nonzero(y[k:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise DomainError("curve does not cross half maximum on both sides")
    i = left[-1]
    j = k + right[0]
    xl = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    xr = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    return xr - xl


def half_min_width(x, y):
    """FWHM of a dip whose baseline is 1 and whose depth is ``1 - min(y)``."""
    y = np.asarray(y, dtype=float)
    return half_max_width(x, 1.0 - y)


class Periodicity(NamedTuple):
    period: float
    amplitude: float
    power_ratio: float


def _power(x, y, f):
    ph = np.exp(-2j * math.pi * np.multiply.outer(np.atleast_1d(f), x))
    return np.abs(ph @ y) ** 2


def dominant_period(x, y, detrend_degree: int = 3, oversample: int = 16) -> Periodicity:
    """Dominant oscillation period of ``y(x)``.

    A low-order polynomial trend is removed, the periodogram is searched on an
    oversampled grid, and the peak frequency is refined by golden section.
    ``amplitude`` is the sinusoid amplitude at that frequency and
    ``power_ratio`` its power over the median periodogram level.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 8:
        raise DomainError("need at least 8 samples to estimate a period")
    span = x[-1] - x[0]
    xs = (x - x[0]) / span
    coef = np.polynomial.polynomial.polyfit(xs, y, detrend_degree)
    resid = y - np.polynomial.polynomial.polyval(xs, coef)
    f_lo = 2.0 / span
    f_hi = 0.5 / np.median(np.diff(x))
    n_grid = max(64, int(oversample * (f_hi - f_lo) * span))
    grid = np.linspace(f_lo, f_hi, n_grid)
    p = _power(x, resid, grid)
    k = int(np.argmax(p))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    pc, pd = _power(x, resid, c)[0], _power(x, resid, d)[0]
    while b - a > 1e-12 * b:
        if pc > pd:
            b, d, pd = d, c, pc
            c = b - g * (b - a)
            pc = _power(x, resid, c)[0]
        else:
            a, c, pc = c, d, pd
            d = a + g * (b - a)
            pd = _power(x, resid, d)[0]
    f = 0.5 * (a + b)
    peak = _power(x, resid, f)[0]
    amplitude = 2.0 * math.sqrt(peak) / x.size
    return Periodicity(1.0 / f, amplitude, peak / max(np.median(p), 1e-300))


def modulation_depth(model: InterferenceModel, l_center: float, period: float,
                     samples: int = 401) -> float:
    """Relative depth ``(V_max - V_min)/V_max`` of the visibility over one
    modulation period centred on ``l_center`` [m]."""
    l = np.linspace(l_center - 0.5 * period, l_center + 0.5 * period, samples)
    v = local_visibility(model, airgap_to_delay(l))
    return float((v.max() - v.min()) / v.max())
