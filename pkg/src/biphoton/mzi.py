"""Coincidence interference of the idler photon in an unbalanced Mach-Zehnder
interferometer, with the signal photon filtered remotely.

The normalized coincidence rate is ``R_n = 1 + ρ(Δt)`` with

    ρ(Δt) = 2 Re{T_l* T_s e^{iω2⁰Δt} G(Δt)} / (|T_l|² + |T_s|²)

where ``G`` is the normalized Fourier transform of the joint spectral density
over the signal detuning ν1, ``G(Δt) = ∫S(ν1)e^{-iν1Δt}dν1 / ∫S(ν1)dν1``.
Three evaluators of ``G`` are provided: the Gaussian closed form, the
Fabry-Perot roundtrip series, and direct adaptive quadrature (the oracle for
the other two).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import DomainError, NumericError
from .quadrature import adaptive_rule
from .spectra import (
    BiphotonSource,
    FabryPerotFilter,
    FilterChain,
    biphoton_spectral_density,
    gaussian_profile,
)
from .units import C, airgap_to_delay

LN2 = math.log(2.0)


@dataclass(frozen=True)
class MachZehnder:
    """Complex amplitude transmittances of the short (``t_s``) and long (``t_l``) arm."""

    t_s: complex = 1.0
    t_l: complex = 1.0

    def __post_init__(self):
        if not (abs(self.t_s) ** 2 + abs(self.t_l) ** 2 > 0):
            raise DomainError("at least one interferometer arm must transmit")

    @classmethod
    def from_ratio(cls, ratio: float = 1.0, phase_deg: float = 0.0) -> "MachZehnder":
        """``|T_l/T_s| = ratio`` with relative phase ``phase_deg``."""
        if not (ratio >= 0 and math.isfinite(ratio)):
            raise DomainError(f"arm ratio must be finite and >= 0, got {ratio!r}")
        return cls(1.0, ratio * complex(math.cos(math.radians(phase_deg)),
                                        math.sin(math.radians(phase_deg))))

    @property
    def norm(self) -> float:
        return abs(self.t_s) ** 2 + abs(self.t_l) ** 2

    @property
    def cross(self) -> complex:
        return complex(self.t_l).conjugate() * self.t_s

    @property
    def fringe_amplitude(self) -> float:
        """Visibility ceiling ``2|T_s T_l| / (|T_s|² + |T_l|²)``."""
        return 2.0 * abs(self.cross) / self.norm


@dataclass(frozen=True)
class FpSeriesParams:
    c_norm: float
    t0: float
    phi0: float
    gamma: float
    decay: float

    def __post_init__(self):
        if not (0 < self.decay < 1):
            raise DomainError(f"decay factor must lie in (0, 1), got {self.decay!r}")
        if not (self.c_norm > 0 and self.t0 > 0):
            raise DomainError("c_norm and t0 must be positive")


@dataclass(frozen=True)
class VisibilityScan:
    """Visibility (or interference term) against air-gap position [m]."""

    l_ag: np.ndarray
    values: np.ndarray
    kind: str = "visibility"
    source: str = "computed"
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        l_ag = np.asarray(self.l_ag, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "l_ag", l_ag)
        object.__setattr__(self, "values", values)
        if self.kind not in ("visibility", "interference_term"):
            raise DomainError(f"unknown scan kind {self.kind!r}")
        if self.source not in ("computed", "measured"):
            raise DomainError(f"unknown scan source {self.source!r}")
        if l_ag.ndim != 1 or l_ag.shape != values.shape or l_ag.size == 0:
            raise DomainError("scan needs matching, nonempty 1-D position and value arrays")
        if np.any(np.diff(l_ag) <= 0):
            raise DomainError("air-gap positions must be strictly increasing")
        lo = 0.0 if self.kind == "visibility" else -1.0
        slack = 1e-9
        if np.any(values < lo - slack) or np.any(values > 1.0 + slack) or not np.all(np.isfinite(values)):
            raise DomainError(f"{self.kind} values must lie in [{lo:g}, 1]")
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != values.shape or np.any(sigma <= 0):
                raise DomainError("per-point standard deviations must be positive")
            object.__setattr__(self, "sigma", sigma)

    @property
    def delta_t(self) -> np.ndarray:
        return airgap_to_delay(self.l_ag)

    def __len__(self):
        return self.l_ag.size


# -- closed forms ------------------------------------------------------------

def beta2_from_widths(sigma1: float, sigma2: float) -> float:
    return sigma1**-2 + sigma2**-2


def visibility_envelope_gaussian(beta2, dt):
    """Gaussian visibility envelope ``exp(-Δt²/(4β₂))``."""
    if not beta2 > 0:
        raise DomainError("beta2 must be positive")
    dt = np.asarray(dt, dtype=float)
    return np.exp(-dt * dt / (4.0 * beta2))[()]


def envelope_fwhm_delay(beta2: float) -> float:
    return 4.0 * math.sqrt(beta2 * LN2)


def envelope_fwhm_airgap(beta2: float) -> float:
    """FWHM of the Gaussian visibility envelope in air-gap units [m]."""
    return C * envelope_fwhm_delay(beta2)


def beta2_from_envelope_fwhm_airgap(fwhm: float) -> float:
    return (fwhm / C) ** 2 / (16.0 * LN2)


def _rho(mzi: MachZehnder, omega2_0: float, dt, corr):
    dt = np.asarray(dt, dtype=float)
    return (2.0 * np.real(mzi.cross * np.exp(1j * omega2_0 * dt) * corr) / mzi.norm)[()]


def interference_term_gaussian(source: BiphotonSource, mzi: MachZehnder, dt,
                               sigma1: Optional[float] = None, sigma2: Optional[float] = None):
    """Interference term for Gaussian spectra.

    ``sigma1``/``sigma2`` are the fully composed signal/idler widths; they
    default to the source's geometric widths.
    """
    s1 = source.sigma_geo1 if sigma1 is None else sigma1
    s2 = source.sigma_geo2 if sigma2 is None else sigma2
    if s1 is None or s2 is None:
        raise DomainError("both arm widths are needed for the Gaussian closed form")
    beta2 = beta2_from_widths(s1, s2)
    return _rho(mzi, source.omega2_0, dt, visibility_envelope_gaussian(beta2, dt))


def normalized_rate(rho):
    """``R_n = 1 + ρ``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > 1.0 + 1e-9):
        raise DomainError("|rho| exceeds 1: the interference term is unphysical")
    return (1.0 + rho)[()]


# -- Fabry-Perot roundtrip series --------------------------------------------

def fp_decay(gamma: float) -> float:
    """Per-roundtrip amplitude factor ``1 + 2/γ - 2√(1+γ)/γ``.

    Evaluated as ``(√(1+γ)-1)/(√(1+γ)+1)``, the same number without the
    cancellation at large finesse.
    """
    r = math.sqrt(1.0 + gamma)
    return (r - 1.0) / (r + 1.0)


def _series_norm(decay: float, phi0: float, t0: float, beta2: float, max_terms: int = 10000) -> float:
    total = 1.0
    for n in range(1, max_terms + 1):
        term = decay**n * math.exp(-(n * t0) ** 2 / (4.0 * beta2))
        total += 2.0 * term * math.cos(n * phi0)
        if term < 1e-15:
            return total
    raise NumericError(f"normalization series did not converge within {max_terms} terms")


def fp_series_params(fp: FabryPerotFilter, omega1_0: float, beta2: float,
                     mzi: MachZehnder) -> FpSeriesParams:
    if not beta2 > 0:
        raise DomainError("beta2 must be positive")
    t0 = 2.0 * fp.l_f / C
    phi0 = omega1_0 * t0
    gamma = fp.gamma
    decay = fp_decay(gamma)
    c_norm = mzi.norm * _series_norm(decay, phi0, t0, beta2)
    return FpSeriesParams(c_norm=c_norm, t0=t0, phi0=phi0, gamma=gamma, decay=decay)


def fp_series_sum(params: FpSeriesParams, beta2: float, dt):
    """Unnormalized roundtrip sum ``Σ a^|n| e^{inφ0} exp[-(Δt-nt0)²/(4β₂)]``."""
    return kernels.fp_series_sum(np.asarray(dt, dtype=float), params.t0, params.phi0,
                                 params.decay, beta2)[()]


def interference_term_fp_series(params: FpSeriesParams, omega2_0: float, beta2: float,
                                mzi: MachZehnder, dt):
    """Interference term from the roundtrip series (FP in the signal arm)."""
    s = fp_series_sum(params, beta2, dt)
    dt = np.asarray(dt, dtype=float)
    return (2.0 * np.real(mzi.cross * np.exp(1j * omega2_0 * dt) * s) / params.c_norm)[()]


def upper_envelope(params: FpSeriesParams, dt):
    """Approximate upper envelope ``a^(|Δt|/t0)`` of the FP visibility."""
    dt = np.asarray(dt, dtype=float)
    return (params.decay ** (np.abs(dt) / params.t0))[()]


# -- models ------------------------------------------------------------------

class InterferenceModel:
    """Evaluates ``G(Δt)`` and everything derived from it.

    Subclasses implement :meth:`correlation`; :meth:`correlation_near` may be
    overridden when evaluation can be specialised to a neighbourhood of one
    detuning (one optical period).
    """

    omega2_0: float
    mzi: MachZehnder

    def correlation(self, dt):
        raise NotImplementedError

    def correlation_near(self, centers, dt):
        """``G`` on a ``(len(centers), m)`` array whose row i lies near ``centers[i]``."""
        return self.correlation(dt)

    def rho(self, dt):
        return _rho(self.mzi, self.omega2_0, dt, self.correlation(dt))

    def rho_near(self, centers, dt):
        return _rho(self.mzi, self.omega2_0, dt, self.correlation_near(centers, dt))

    def envelope(self, dt):
        """``|G(Δt)|``, the fringe envelope for balanced arms."""
        return np.abs(self.correlation(dt))[()]

    def visibility(self, dt):
        """Envelope-based visibility ``fringe_amplitude·|G|``.

        Equals :func:`local_visibility` up to the change of the envelope
        within one optical period.
        """
        return (self.mzi.fringe_amplitude * np.abs(self.correlation(dt)))[()]


class GaussianModel(InterferenceModel):
    def __init__(self, omega2_0: float, beta2: float, mzi: MachZehnder, nu_bar: float = 0.0):
        if not beta2 > 0:
            raise DomainError("beta2 must be positive")
        self.omega2_0, self.beta2, self.mzi, self.nu_bar = omega2_0, beta2, mzi, nu_bar

    def correlation(self, dt):
        dt = np.asarray(dt, dtype=float)
        g = np.exp(-dt * dt / (4.0 * self.beta2))
        if self.nu_bar:
            g = g * np.exp(-1j * self.nu_bar * dt)
        return g[()]


class FpSeriesModel(InterferenceModel):
    def __init__(self, omega2_0: float, beta2: float, params: FpSeriesParams,
                 mzi: MachZehnder, nu_bar: float = 0.0):
        self.omega2_0, self.beta2, self.params, self.mzi, self.nu_bar = (
            omega2_0, beta2, params, mzi, nu_bar)
        self._s0 = params.c_norm / mzi.norm

    def correlation(self, dt):
        dt = np.asarray(dt, dtype=float)
        g = fp_series_sum(self.params, self.beta2, dt) / self._s0
        if self.nu_bar:
            g = g * np.exp(-1j * self.nu_bar * dt)
        return g

    def upper_envelope(self, dt):
        return upper_envelope(self.params, dt)


class QuadratureModel(InterferenceModel):
    """Direct adaptive quadrature of ``∫S(ν1)e^{-iν1Δt}dν1`` over |ν1-ν̄| ≤ 8/√β₂.

    Panels are split at every FP resonance. A rule is adapted per detuning and
    reused for detunings within one optical period of it.
    """

    WINDOW = 8.0

    def __init__(self, source: BiphotonSource, signal_chain: FilterChain,
                 idler_chain: FilterChain, mzi: MachZehnder, epsrel: float = 1e-12):
        self.source, self.signal_chain, self.idler_chain = source, signal_chain, idler_chain
        self.omega2_0, self.mzi, self.epsrel = source.omega2_0, mzi, epsrel
        prof = gaussian_profile(source, signal_chain, idler_chain)
        self.beta2 = prof.beta2
        half = self.WINDOW / math.sqrt(prof.beta2)
        lo, hi = prof.nu_bar - half, prof.nu_bar + half
        breaks = [lo, hi]
        for fp in signal_chain.fabry_perots():
            breaks += list(fp.resonances(source.omega1_0 + lo, source.omega1_0 + hi) - source.omega1_0)
        for fp in idler_chain.fabry_perots():
            breaks += list(source.omega2_0 - fp.resonances(source.omega2_0 - hi, source.omega2_0 - lo))
        self.breakpoints = np.unique(np.asarray(breaks))
        self._rule = lru_cache(maxsize=4096)(self._build_rule)

    def density(self, nu1):
        return biphoton_spectral_density(self.source, self.signal_chain, self.idler_chain, nu1)

    def _build_rule(self, dt_c: float):
        def f(x):
            s = self.density(x)
            return np.stack([s, s * np.cos(x * dt_c), s * np.sin(x * dt_c)])

        rule = adaptive_rule(f, self.breakpoints, epsrel=self.epsrel)
        ws = rule.weights * self.density(rule.nodes)
        return rule.nodes, ws, ws.sum()

    def _corr_at(self, center: float, dt):
        nodes, ws, den = self._rule(float(center))
        dt = np.asarray(dt, dtype=float)
        return (np.exp(-1j * np.multiply.outer(dt, nodes)) @ ws) / den

    def correlation(self, dt):
        dt = np.asarray(dt, dtype=float)
        flat = dt.ravel()
        out = np.array([self._corr_at(d, d) for d in flat], dtype=complex)
        return out.reshape(dt.shape)[()]

    def correlation_near(self, centers, dt):
        dt = np.asarray(dt, dtype=float)
        return np.stack([self._corr_at(c, row) for c, row in zip(np.ravel(centers), dt)])


def build_model(source: BiphotonSource, signal_chain: Optional[FilterChain] = None,
                idler_chain: Optional[FilterChain] = None, mzi: Optional[MachZehnder] = None,
                method: str = "auto") -> InterferenceModel:
    """Pick an evaluator for the configuration.

    ``auto`` uses the Gaussian closed form when no FP is present, the
    roundtrip series for exactly one FP, and quadrature otherwise.
    """
    signal_chain = signal_chain or FilterChain()
    idler_chain = idler_chain or FilterChain()
    mzi = mzi or MachZehnder()
    if method not in ("auto", "gaussian", "series", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    prof = gaussian_profile(source, signal_chain, idler_chain)
    n_fp = len(prof.fabry_perots)
    if method == "auto":
        method = {0: "gaussian", 1: "series"}.get(n_fp, "quadrature")
    if method == "quadrature":
        return QuadratureModel(source, signal_chain, idler_chain, mzi)
    if method == "gaussian":
        if n_fp:
            raise DomainError("the Gaussian closed form cannot include a Fabry-Perot filter")
        return GaussianModel(source.omega2_0, prof.beta2, mzi, prof.nu_bar)
    if n_fp != 1:
        raise DomainError("the roundtrip series needs exactly one Fabry-Perot filter")
    arm, fp = prof.fabry_perots[0]
    if arm == "signal":
        params = fp_series_params(fp, source.omega1_0 + prof.nu_bar, prof.beta2, mzi)
    else:
        # idler-side comb: roundtrip phase picks up the opposite sign
        params = fp_series_params(fp, source.omega2_0 - prof.nu_bar, prof.beta2, mzi)
        params = replace(params, phi0=-params.phi0)
    return FpSeriesModel(source.omega2_0, prof.beta2, params, mzi, prof.nu_bar)


def interference_term_fp_quadrature(source: BiphotonSource, signal_chain: FilterChain,
                                    mzi: MachZehnder, dt, idler_chain: Optional[FilterChain] = None):
    """Interference term by direct quadrature over the signal detuning."""
    model = QuadratureModel(source, signal_chain, idler_chain or FilterChain(), mzi)
    return model.rho(dt)


# -- visibility extraction ---------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class Extrema(NamedTuple):
    r_max: np.ndarray
    r_min: np.ndarray


def _golden(fun, lo, hi, xtol):
    """Row-wise golden-section minimisation; returns the smallest value seen."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = fun(c), fun(d)
    best = np.minimum(fc, fd)
    while np.max(hi - lo) > xtol:
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        x = np.where(left, hi - _INVPHI * (hi - lo), lo + _INVPHI * (hi - lo))
        fx = fun(x)
        best = np.minimum(best, fx)
        c, d, fc, fd = (np.where(left, x, d), np.where(left, c, x),
                        np.where(left, fx, fd), np.where(left, fc, fx))
    return best


def local_extrema(model: InterferenceModel, dt_centers, samples: int = 64,
                  rtol: float = 1e-12) -> Extrema:
    """Max and min of ``R_n`` over one optical period centred on each detuning."""
    centers = np.atleast_1d(np.asarray(dt_centers, dtype=float))
    period = 2.0 * math.pi / model.omega2_0
    u = np.linspace(-0.5 * period, 0.5 * period, samples + 1)
    r = 1.0 + model.rho_near(centers, centers[:, None] + u[None, :])
    rows = np.arange(centers.size)
    xtol = rtol * period

    def bracket(k):
        return u[np.maximum(k - 1, 0)], u[np.minimum(k + 1, samples)]

    def rate(x):
        return 1.0 + model.rho_near(centers, (centers + x)[:, None])[:, 0]

    kmax, kmin = np.argmax(r, axis=1), np.argmin(r, axis=1)
    lo, hi = bracket(kmax)
    r_max = np.maximum(r[rows, kmax], -_golden(lambda x: -rate(x), lo, hi, xtol))
    lo, hi = bracket(kmin)
    r_min = np.minimum(r[rows, kmin], _golden(rate, lo, hi, xtol))
    return Extrema(r_max, r_min)


def local_visibility(model: InterferenceModel, dt_center):
    """Fringe visibility ``(R_max - R_min)/(R_max + R_min)`` around ``dt_center``."""
    ext = local_extrema(model, dt_center)
    den = ext.r_max + ext.r_min
    if np.any(den == 0):
        raise NumericError("visibility undefined: R_max + R_min = 0")
    v = (ext.r_max - ext.r_min) / den
    return v[0] if np.ndim(dt_center) == 0 else v


class ScanTable(NamedTuple):
    l_ag: np.ndarray
    delta_t: np.ndarray
    rho: np.ndarray
    r_max: np.ndarray
    r_min: np.ndarray
    visibility: np.ndarray


def evaluate_scan(model: InterferenceModel, l_ag, threads: int = 1) -> ScanTable:
    """Evaluate ρ and the local fringe extrema at each air-gap position.

    Points are independent, so splitting the work over threads does not
    change any value.
    """
    l_ag = np.asarray(l_ag, dtype=float)
    if l_ag.ndim != 1 or l_ag.size == 0:
        raise DomainError("air-gap positions must be a nonempty 1-D sequence")
    if np.any(np.diff(l_ag) <= 0):
        raise DomainError("air-gap positions must be strictly increasing")
    dt = airgap_to_delay(l_ag)
    dt = np.atleast_1d(dt)
    threads = max(1, int(threads))
    if threads == 1 or dt.size < 2 * threads:
        ext = local_extrema(model, dt)
    else:
        parts = np.array_split(dt, threads)
        with ThreadPoolExecutor(threads) as pool:
            res = list(pool.map(lambda p: local_extrema(model, p), parts))
        ext = Extrema(np.concatenate([e.r_max for e in res]), np.concatenate([e.r_min for e in res]))
    den = ext.r_max + ext.r_min
    if np.any(den == 0):
        raise NumericError("visibility undefined: R_max + R_min = 0")
    vis = (ext.r_max - ext.r_min) / den
    rho = np.atleast_1d(model.rho(dt))
    return ScanTable(l_ag, dt, rho, ext.r_max, ext.r_min, vis)


def visibility_scan(model: InterferenceModel, l_ag, threads: int = 1) -> VisibilityScan:
    table = evaluate_scan(model, l_ag, threads)
    return VisibilityScan(table.l_ag, np.clip(table.visibility, 0.0, 1.0), "visibility", "computed")
