"""Hong-Ou-Mandel dip of the same pair source.

Frequency-domain reduction used by :func:`hom_general_quadrature`: with the
cw-pump constraint, write the pair amplitude as ``f(ν)`` where the signal sits
at ``ωp/2 + ν`` and the idler at ``ωp/2 - ν``. Both time integrals of the
exchange term collapse onto ``μ = -ν`` and leave

    ρ_HOM(Δt) = ∫ f(ν) f(-ν) cos(2νΔt) dν / ∫ f(ν)² dν ,

with ``f = √S`` for filters that add no spectral phase. For a spectrum
symmetric about degeneracy ``f(ν)f(-ν) = S(ν)`` and this is the cosine
transform of the joint density.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError
from .quadrature import adaptive_rule
from .spectra import BiphotonSource, FilterChain, biphoton_spectral_density, gaussian_profile
from .units import C

LN2 = math.log(2.0)


@dataclass(frozen=True)
class HomModel:
    """Common Gaussian width ``sigma`` of both photons, plus optional filters
    (and the source they act on) for the general form."""

    sigma: float
    source: Optional[BiphotonSource] = None
    signal_chain: FilterChain = field(default_factory=FilterChain)
    idler_chain: FilterChain = field(default_factory=FilterChain)

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")

    @classmethod
    def from_source(cls, source: BiphotonSource, signal_chain: Optional[FilterChain] = None,
                    idler_chain: Optional[FilterChain] = None) -> "HomModel":
        """Model whose ``sigma`` is the effective Gaussian width ``√(2/β₂)``."""
        signal_chain = signal_chain or FilterChain()
        idler_chain = idler_chain or FilterChain()
        prof = gaussian_profile(source, signal_chain, idler_chain)
        return cls(math.sqrt(2.0 / prof.beta2), source, signal_chain, idler_chain)


def hom_interference_term(model: HomModel, dt):
    """Gaussian closed form ``exp(-σ²Δt²/2)``."""
    dt = np.asarray(dt, dtype=float)
    return np.exp(-0.5 * (model.sigma * dt) ** 2)[()]


def hom_rate(model: HomModel, dt):
    """Normalized HOM coincidence rate ``1 - ρ_HOM``."""
    return (1.0 - np.asarray(hom_interference_term(model, dt)))[()]


def hom_dip_fwhm_delay(sigma: float) -> float:
    return 2.0 * math.sqrt(2.0 * LN2) / sigma


def hom_dip_fwhm_path(sigma: float) -> float:
    """Dip FWHM in path difference [m]."""
    return C * hom_dip_fwhm_delay(sigma)


def sigma_from_hom_dip_fwhm_path(fwhm: float) -> float:
    return 2.0 * C * math.sqrt(2.0 * LN2) / fwhm


def hom_interference_term_gaussian_profile(beta2: float, nu_bar: float, dt):
    """Closed form for any product of Gaussian filters.

    ``nu_bar`` is the spectral centroid measured from degeneracy; an offset
    makes the photons distinguishable and lowers the dip by ``exp(-β₂ν̄²)``.
    """
    dt = np.asarray(dt, dtype=float)
    return (math.exp(-beta2 * nu_bar**2) * np.exp(-dt * dt / beta2))[()]


class _HomQuadrature:
    WINDOW = 8.0

    def __init__(self, source, signal_chain, idler_chain, epsrel):
        self.source, self.signal_chain, self.idler_chain = source, signal_chain, idler_chain
        self.offset = 0.5 * source.omega_p - source.omega1_0  # ν1 = ν + offset
        prof = gaussian_profile(source, signal_chain, idler_chain)
        nu_bar = prof.nu_bar - self.offset
        half = abs(nu_bar) + self.WINDOW / math.sqrt(prof.beta2)
        breaks = [-half, half, 0.0]
        mid = 0.5 * source.omega_p
        for fp in signal_chain.fabry_perots():
            r = fp.resonances(mid - half, mid + half) - mid
            breaks += list(r) + list(-r)
        for fp in idler_chain.fabry_perots():
            r = mid - fp.resonances(mid - half, mid + half)
            breaks += list(r) + list(-r)
        self.breaks = np.unique(breaks)
        self.epsrel = epsrel
        self.rule = lru_cache(maxsize=4096)(self._rule)

    def density(self, nu):
        return biphoton_spectral_density(self.source, self.signal_chain, self.idler_chain,
                                         nu + self.offset)

    def _rule(self, dt: float):
        def f(x):
            s, s_m = self.density(x), self.density(-x)
            return np.stack([s, np.sqrt(s * s_m) * np.cos(2.0 * x * dt)])

        rule = adaptive_rule(f, self.breaks, epsrel=self.epsrel)
        vals = f(rule.nodes)
        return rule.integrate(vals)

    def rho(self, dt):
        den, num = self.rule(float(dt))
        return num / den


def hom_general_quadrature(model: HomModel, dt, epsrel: float = 1e-12):
    """HOM interference term for arbitrary filter chains, by quadrature."""
    source = model.source
    if source is None:
        raise DomainError("the general HOM form needs a BiphotonSource on the model")
    q = _hom_quadrature(source, model.signal_chain, model.idler_chain, epsrel)
    dt = np.asarray(dt, dtype=float)
    out = np.array([q.rho(d) for d in dt.ravel()]).reshape(dt.shape)
    return out[()]


@lru_cache(maxsize=32)
def _hom_quadrature(source, signal_chain, idler_chain, epsrel):
    return _HomQuadrature(source, signal_chain, idler_chain, epsrel)
