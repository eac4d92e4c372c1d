"""Intensity transmittance models and the filtered biphoton spectral density.

Under cw pumping the pair frequencies are locked, ``ω1 + ω2 = ωp``, so the
joint spectrum of a filtered pair is a function of one variable: the signal
detuning ``ν1 = ω1 - ω1⁰`` (the idler then sits at ``ω2⁰ - ν1``). The
phase-matching function is constant on that line and drops out of every
normalized quantity, so it carries no weight here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from . import kernels
from .errors import DomainError
from .units import C, angular_frequency_to_wavelength, wavelength_to_angular_frequency


@dataclass(frozen=True)
class GaussianFilter:
    """``T(ω) = exp[-(ω - omega0)² / sigma²]``."""

    omega0: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise DomainError(f"omega0 must be positive, got {self.omega0!r}")
        if not (self.sigma > 0):  # inf is allowed: a transparent filter
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")

    def transmittance(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(-(((omega - self.omega0) / self.sigma) ** 2))[()]


@dataclass(frozen=True)
class FabryPerotFilter:
    """Airy transmittance ``t_max / (1 + γ sin²(l_f ω / c))`` with ``γ = (2F/π)²``."""

    l_f: float
    finesse: float
    t_max: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.l_f) and self.l_f > 0):
            raise DomainError(f"l_f must be positive, got {self.l_f!r}")
        if not (math.isfinite(self.finesse) and self.finesse > 1):
            raise DomainError(f"finesse must exceed 1, got {self.finesse!r}")
        if not (0 < self.t_max <= 1):
            raise DomainError(f"t_max must lie in (0, 1], got {self.t_max!r}")

    @property
    def gamma(self) -> float:
        return (2.0 * self.finesse / math.pi) ** 2

    @property
    def roundtrip_time(self) -> float:
        return 2.0 * self.l_f / C

    def transmittance(self, omega):
        omega = np.ascontiguousarray(omega, dtype=float)
        out = kernels.fp_transmittance(omega.ravel(), self.l_f / C, self.gamma, self.t_max)
        return out.reshape(omega.shape)[()]

    def resonances(self, lo: float, hi: float) -> np.ndarray:
        """Angular frequencies of transmission maxima inside ``[lo, hi]``."""
        fsr = math.pi * C / self.l_f
        k = np.arange(math.ceil(lo / fsr), math.floor(hi / fsr) + 1)
        return k * fsr


Filter = Union[GaussianFilter, FabryPerotFilter]


@dataclass(frozen=True)
class FilterChain:
    """Filters in series; the chain transmits the product of its members."""

    filters: Tuple[Filter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        for f in self.filters:
            if not isinstance(f, (GaussianFilter, FabryPerotFilter)):
                raise DomainError(f"unsupported filter {f!r}")

    def __iter__(self):
        return iter(self.filters)

    def __len__(self):
        return len(self.filters)

    def transmittance(self, omega):
        out = np.ones_like(np.asarray(omega, dtype=float))
        for f in self.filters:
            out = out * f.transmittance(omega)
        return out[()]

    def gaussians(self):
        return [f for f in self.filters if isinstance(f, GaussianFilter)]

    def fabry_perots(self):
        return [f for f in self.filters if isinstance(f, FabryPerotFilter)]


def transmittance(filt, omega):
    """Intensity transmittance of a filter or chain at angular frequency ``omega``."""
    if np.any(np.asarray(omega) <= 0):
        raise DomainError("omega must be positive")
    return filt.transmittance(omega)


class FreeSpectralRange(NamedTuple):
    omega: float
    wavelength: Optional[float]


def fp_free_spectral_range(fp: FabryPerotFilter, lambda0: Optional[float] = None) -> FreeSpectralRange:
    """Peak spacing ``πc/l_F`` in angular frequency and, given ``lambda0``,
    ``λ0²/(2 l_F)`` in wavelength."""
    omega_fsr = math.pi * C / fp.l_f
    lam = None if lambda0 is None else lambda0**2 / (2.0 * fp.l_f)
    return FreeSpectralRange(omega_fsr, lam)


def gaussian_compose(a: GaussianFilter, b: GaussianFilter) -> GaussianFilter:
    """Single Gaussian equal to the product of two co-centered Gaussians."""
    if abs(a.omega0 - b.omega0) >= 1e-4 * min(a.sigma, b.sigma):
        raise DomainError(
            "Gaussian filters have different centers; combine them in a FilterChain"
        )
    inv = a.sigma**-2 + b.sigma**-2
    return GaussianFilter(a.omega0, 1.0 / math.sqrt(inv))


@dataclass(frozen=True)
class BiphotonSource:
    """cw-pumped SPDC pair source.

    ``sigma_geo1``/``sigma_geo2`` are the Gaussian widths of the geometric
    (aperture) filtering of each arm; ``None`` switches it off for that arm.
    ``crystal_length`` and ``group_velocity`` are informational only.
    """

    omega_p: float
    omega1_0: float
    omega2_0: float
    sigma_geo1: Optional[float]
    sigma_geo2: Optional[float]
    crystal_length: Optional[float] = None
    group_velocity: Optional[float] = None

    def __post_init__(self):
        for name in ("omega_p", "omega1_0", "omega2_0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")
        if abs(self.omega1_0 + self.omega2_0 - self.omega_p) > 1e-12 * self.omega_p:
            raise DomainError("central frequencies violate omega1_0 + omega2_0 = omega_p")
        for name in ("sigma_geo1", "sigma_geo2"):
            v = getattr(self, name)
            if v is not None and not (v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")

    @classmethod
    def degenerate(cls, pump_wavelength: float, geo_fwhm_signal: Optional[float],
                   geo_fwhm_idler: Optional[float], **kw) -> "BiphotonSource":
        """Degenerate source; geometric widths given as wavelength FWHMs [m]."""
        from .units import fwhm_wavelength_to_sigma

        omega_p = wavelength_to_angular_frequency(pump_wavelength)
        lam = 2.0 * pump_wavelength
        s1 = None if geo_fwhm_signal is None else fwhm_wavelength_to_sigma(geo_fwhm_signal, lam)
        s2 = None if geo_fwhm_idler is None else fwhm_wavelength_to_sigma(geo_fwhm_idler, lam)
        return cls(omega_p, omega_p / 2.0, omega_p / 2.0, s1, s2, **kw)

    @property
    def signal_wavelength(self) -> float:
        return angular_frequency_to_wavelength(self.omega1_0)

    @property
    def idler_wavelength(self) -> float:
        return angular_frequency_to_wavelength(self.omega2_0)


def biphoton_spectral_density(source: BiphotonSource, signal_chain: FilterChain,
                              idler_chain: FilterChain, nu1):
    """Joint spectral weight of the filtered pair at signal detuning ``nu1`` [rad/s]."""
    nu1 = np.asarray(nu1, dtype=float)
    if not np.all(np.isfinite(nu1)):
        raise DomainError("nu1 must be finite")
    expo = np.zeros_like(nu1)
    if source.sigma_geo1 is not None:
        expo -= (nu1 / source.sigma_geo1) ** 2
    if source.sigma_geo2 is not None:
        expo -= (nu1 / source.sigma_geo2) ** 2
    out = np.exp(expo)
    if len(signal_chain):
        out = out * signal_chain.transmittance(source.omega1_0 + nu1)
    if len(idler_chain):
        out = out * idler_chain.transmittance(source.omega2_0 - nu1)
    return out[()]


@dataclass(frozen=True)
class GaussianProfile:
    """All Gaussian factors of the joint density folded into ``exp[-β(ν1-ν̄)²]``.

    ``fabry_perots`` lists the remaining non-Gaussian factors as
    ``(arm, filter)`` pairs with arm in {"signal", "idler"}.
    """

    beta2: float
    nu_bar: float
    fabry_perots: Tuple[Tuple[str, FabryPerotFilter], ...] = field(default=())


def gaussian_profile(source: BiphotonSource, signal_chain: FilterChain,
                     idler_chain: FilterChain) -> GaussianProfile:
    # (center in ν1, width) for every Gaussian factor
    parts = []
    if source.sigma_geo1 is not None:
        parts.append((0.0, source.sigma_geo1))
    if source.sigma_geo2 is not None:
        parts.append((0.0, source.sigma_geo2))
    parts += [(g.omega0 - source.omega1_0, g.sigma) for g in signal_chain.gaussians()]
    parts += [(source.omega2_0 - g.omega0, g.sigma) for g in idler_chain.gaussians()]
    beta = sum(s**-2 for _, s in parts)
    if not beta > 0:
        raise DomainError("joint spectrum has no Gaussian confinement; it is not normalizable")
    nu_bar = sum(c * s**-2 for c, s in parts) / beta
    fps = tuple(("signal", f) for f in signal_chain.fabry_perots())
    fps += tuple(("idler", f) for f in idler_chain.fabry_perots())
    return GaussianProfile(beta, nu_bar, fps)
