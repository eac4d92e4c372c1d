"""Conversions between laboratory quantities and model quantities.

Everything inside the library is SI: meters, seconds, rad/s. The CLI accepts
micrometers and nanometers and converts at the boundary.

Wavelength widths are mapped to angular-frequency widths with the first-order
relation ``dω = 2πc dλ / λ0²``; all the cases handled here have
``dλ/λ0 < 1%``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 2.99792458e8  # m/s, exact


CONSTANTS = PhysicalConstants()
C = CONSTANTS.c

#: FWHM of exp(-x²/σ²) is FWHM_FACTOR·σ.
FWHM_FACTOR = 2.0 * math.sqrt(math.log(2.0))


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def _check_finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {value!r}")


def wavelength_to_angular_frequency(lam):
    """Vacuum wavelength [m] -> angular frequency [rad/s]."""
    _check_positive("wavelength", lam)
    return 2.0 * math.pi * C / np.asarray(lam, dtype=float)[()]


def angular_frequency_to_wavelength(omega):
    """Angular frequency [rad/s] -> vacuum wavelength [m]."""
    _check_positive("angular frequency", omega)
    return 2.0 * math.pi * C / np.asarray(omega, dtype=float)[()]


def fwhm_wavelength_to_sigma(delta_lambda, lambda0):
    """Gaussian width σ [rad/s] of a spectrum with intensity FWHM ``delta_lambda``.

    The intensity profile is ``exp[-(ω-ω0)²/σ²]`` whose FWHM is ``2√(ln2)σ``.
    """
    _check_positive("delta_lambda", delta_lambda)
    _check_positive("lambda0", lambda0)
    return math.pi * C * delta_lambda / (math.sqrt(math.log(2.0)) * lambda0**2)


def sigma_to_fwhm_wavelength(sigma, lambda0):
    """Inverse of :func:`fwhm_wavelength_to_sigma`."""
    _check_positive("sigma", sigma)
    _check_positive("lambda0", lambda0)
    return sigma * math.sqrt(math.log(2.0)) * lambda0**2 / (math.pi * C)


def airgap_to_delay(l_ag):
    """Air-gap position [m] -> MZ detuning Δt [s]. Negative positions are allowed."""
    _check_finite("air-gap position", l_ag)
    return np.asarray(l_ag, dtype=float)[()] / C


def delay_to_airgap(dt):
    """MZ detuning Δt [s] -> air-gap position [m]."""
    _check_finite("delay", dt)
    return np.asarray(dt, dtype=float)[()] * C
