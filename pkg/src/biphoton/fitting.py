"""Least-squares estimation of model parameters from visibility scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .analysis import dominant_period
from .errors import DomainError, FitError
from .mzi import (
    FpSeriesModel,
    InterferenceModel,
    MachZehnder,
    VisibilityScan,
    beta2_from_envelope_fwhm_airgap,
    fp_series_params,
    local_visibility,
)
from .spectra import FabryPerotFilter
from .units import C, airgap_to_delay, sigma_to_fwhm_wavelength

LN2 = math.log(2.0)
MODEL_KINDS = ("gaussian_envelope", "fp_series", "fp_plus_filter")


# -- optimizer ----------------------------------------------------------------

@dataclass
class LeastSquaresResult:
    x: np.ndarray
    residuals: np.ndarray
    jac: np.ndarray
    n_iter: int
    converged: bool
    method: str
    message: str


def _jacobian(fun, x, r, lower, upper, rel_step):
    jac = np.empty((r.size, x.size))
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1e-3 * (upper[i] - lower[i]))
        xi = x.copy()
        xi[i] = x[i] + h if x[i] + h <= upper[i] else x[i] - h
        jac[:, i] = (fun(xi) - r) / (xi[i] - x[i])
    return jac


def levenberg_marquardt(fun: Callable[[np.ndarray], np.ndarray], x0, lower, upper,
                        max_iter: int = 500, rel_step: float = 1e-6,
                        ftol: float = 1e-12, xtol: float = 1e-12) -> LeastSquaresResult:
    """Bounded damped least squares with forward-difference Jacobians.

    Steps are projected onto the box. A rank-deficient Jacobian hands the
    problem over to a bounded Nelder-Mead search on the same objective.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    r = fun(x)
    cost = r @ r
    lam = 1e-3
    jac = np.zeros((r.size, x.size))
    for it in range(1, max_iter + 1):
        jac = _jacobian(fun, x, r, lower, upper, rel_step)
        sv = np.linalg.svd(jac, compute_uv=False)
        if sv[-1] <= 1e-12 * sv[0] or not np.all(np.isfinite(sv)):
            return _nelder_mead(fun, x, lower, upper, max_iter)
        a = jac.T @ jac
        g = jac.T @ r
        d = np.maximum(np.diag(a), 1e-30 * np.max(np.diag(a)))
        # parameters pinned at a bound with the descent direction pointing out stay fixed
        free = ~(((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0)))
        if not free.any():
            return LeastSquaresResult(x, r, jac, it, True, "lm", "all parameters at active bounds")
        af, gf, df = a[np.ix_(free, free)], g[free], d[free]
        while True:
            step = np.zeros_like(x)
            step[free] = np.linalg.solve(af + lam * np.diag(df), -gf)
            x_new = np.clip(x + step, lower, upper)
            r_new = fun(x_new)
            cost_new = r_new @ r_new
            if cost_new <= cost:
                lam = max(lam * 0.1, 1e-15)
                break
            lam *= 10.0
            if lam > 1e15:
                return LeastSquaresResult(x, r, jac, it, True, "lm",
                                          "no further decrease possible")
        dx = np.linalg.norm((x_new - x) / np.maximum(np.abs(x), 1e-3 * (upper - lower)))
        small_f = cost - cost_new <= ftol * cost
        x, r, cost = x_new, r_new, cost_new
        if small_f or dx <= xtol:
            return LeastSquaresResult(x, r, jac, it, True, "lm",
                                      "relative reduction of cost below ftol" if small_f
                                      else "step below xtol")
    return LeastSquaresResult(x, r, jac, max_iter, False, "lm",
                              f"no convergence after {max_iter} iterations")


def _nelder_mead(fun, x0, lower, upper, max_iter):
    from scipy.optimize import minimize

    res = minimize(lambda p: float(np.sum(fun(p) ** 2)), x0, method="Nelder-Mead",
                   bounds=list(zip(lower, upper)),
                   options={"maxiter": 200 * max(1, x0.size) * 10, "xatol": 1e-12, "fatol": 1e-16})
    x = np.clip(res.x, lower, upper)
    r = fun(x)
    jac = _jacobian(fun, x, r, lower, upper, 1e-6)
    return LeastSquaresResult(x, r, jac, int(res.nit), bool(res.success), "nelder-mead",
                              "Jacobian rank deficient; " + str(res.message))


# -- problem / result ---------------------------------------------------------

@dataclass
class FitResult:
    estimates: Dict[str, float]
    uncertainties: Dict[str, float]
    rss: float
    residuals: np.ndarray
    n_iter: int
    converged: bool
    method: str = "lm"
    message: str = ""
    derived: Dict[str, float] = field(default_factory=dict)

    @property
    def authoritative(self) -> bool:
        return self.converged


@dataclass
class FitProblem:
    """``free`` maps parameter name to ``(initial, lower, upper)``."""

    scan: VisibilityScan
    model_kind: str
    free: Dict[str, Tuple[float, float, float]]
    fixed: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {self.model_kind!r}")
        if not self.free:
            raise DomainError("a fit needs at least one free parameter")
        for name, (x0, lo, hi) in self.free.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError(f"parameter {name!r} needs finite bounds lower < upper")
            if not lo <= x0 <= hi:
                raise DomainError(f"initial value of {name!r} lies outside its bounds")


def _run(problem_fun, names, x0, lower, upper, scan, max_iter=500):
    w = 1.0 if scan.sigma is None else 1.0 / scan.sigma

    def resid(p):
        return (problem_fun(dict(zip(names, p))) - scan.values) * w

    res = levenberg_marquardt(resid, x0, lower, upper, max_iter=max_iter)
    m, n = res.residuals.size, len(names)
    cov = np.linalg.pinv(res.jac.T @ res.jac)
    if scan.sigma is None:
        cov = cov * (res.residuals @ res.residuals) / max(m - n, 1)
    unc = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        estimates={k: float(v) for k, v in zip(names, res.x)},
        uncertainties={k: float(v) for k, v in zip(names, unc)},
        rss=float(res.residuals @ res.residuals),
        residuals=res.residuals / w,
        n_iter=res.n_iter,
        converged=res.converged,
        method=res.method,
        message=res.message,
    )


# -- Gaussian envelope ---------------------------------------------------------

def gaussian_envelope(l_ag_um, amplitude, fwhm_um, center_um=0.0):
    """``A exp[-4 ln2 (l - l_c)² / FWHM²]``, the Gaussian envelope in air-gap units."""
    x = np.asarray(l_ag_um, dtype=float) - center_um
    return amplitude * np.exp(-4.0 * LN2 * x * x / fwhm_um**2)


def _gaussian_guess(l_um, v):
    k = int(np.argmax(v))
    amp = float(v[k])
    above = l_um[v >= 0.5 * amp]
    fwhm = float(above[-1] - above[0]) if above.size > 1 else float(np.ptp(l_um)) / 4
    return amp, max(fwhm, 1e-6 * float(np.ptp(l_um))), float(l_um[k])


def fit_gaussian_envelope(scan: VisibilityScan, center_wavelength: float = 826.2e-9,
                          fit_center: bool = True,
                          free: Optional[Dict[str, Tuple[float, float, float]]] = None,
                          max_iter: int = 500) -> FitResult:
    """Fit the Gaussian visibility envelope to a scan.

    Parameters are ``amplitude``, ``fwhm_um`` and (optionally) ``center_um``.
    ``derived`` reports ``beta2_s2`` and, assuming equal signal and idler
    widths, the equivalent spectral FWHM ``spectral_fwhm_nm``.
    """
    if len(scan) < 5:
        raise FitError("a Gaussian envelope fit needs at least 5 points")
    v = scan.values
    if np.ptp(v) <= 1e-12 * max(1.0, np.max(np.abs(v))):
        raise FitError("degenerate scan: all values are equal")
    l_um = scan.l_ag * 1e6
    amp, fwhm, center = _gaussian_guess(l_um, v)
    span = float(np.ptp(l_um))
    if free is None:
        free = {
            "amplitude": (min(max(amp, 1e-6), 1.0), 0.0, 1.0),
            "fwhm_um": (min(fwhm, 10 * span), 1e-6 * span, 10.0 * span),
        }
        if fit_center:
            free["center_um"] = (center, float(l_um[0]), float(l_um[-1]))
    problem = FitProblem(scan, "gaussian_envelope", free)
    names = list(problem.free)
    x0 = [problem.free[k][0] for k in names]
    lo = [problem.free[k][1] for k in names]
    hi = [problem.free[k][2] for k in names]

    def model(p):
        return gaussian_envelope(l_um, p.get("amplitude", 1.0), p["fwhm_um"], p.get("center_um", 0.0))

    result = _run(model, names, x0, lo, hi, scan, max_iter)
    fwhm_m = result.estimates["fwhm_um"] * 1e-6
    beta2 = beta2_from_envelope_fwhm_airgap(fwhm_m)
    sigma = math.sqrt(2.0 / beta2)  # σ1 = σ2
    result.derived = {
        "beta2_s2": beta2,
        "fwhm_delay_s": fwhm_m / C,
        "spectral_fwhm_nm": sigma_to_fwhm_wavelength(sigma, center_wavelength) * 1e9,
    }
    if "fwhm_um" in result.uncertainties:
        rel = result.uncertainties["fwhm_um"] / result.estimates["fwhm_um"]
        result.derived["spectral_fwhm_nm_unc"] = rel * result.derived["spectral_fwhm_nm"]
    return result


# -- Fabry-Perot visibility ------------------------------------------------------

def arm_ratio_from_amplitude(k: float) -> float:
    """``r ≤ 1`` with ``2r/(1+r²) = k``."""
    if not 0 < k <= 1:
        raise DomainError("fringe amplitude must lie in (0, 1]")
    return (1.0 - math.sqrt(max(0.0, 1.0 - k * k))) / k


def fp_visibility(l_ag, l_f, finesse, beta2, omega1_0, omega2_0,
                  fringe_amplitude=1.0, mode="local"):
    """Visibility of the FP roundtrip-series model at air-gap positions [m]."""
    fp = FabryPerotFilter(l_f, finesse)
    mzi = MachZehnder.from_ratio(arm_ratio_from_amplitude(fringe_amplitude))
    params = fp_series_params(fp, omega1_0, beta2, mzi)
    model = FpSeriesModel(omega2_0, beta2, params, mzi)
    dt = airgap_to_delay(np.asarray(l_ag, dtype=float))
    if mode == "envelope":
        return model.visibility(dt)
    return local_visibility(model, np.atleast_1d(dt))


_FP_DEFAULT_BOUNDS = {"finesse": (1.5, 1e5), "fringe_amplitude": (1e-6, 1.0)}


def fit_fp_visibility(scan: VisibilityScan, finesse: float, beta2: float,
                      omega1_0: float, omega2_0: Optional[float] = None,
                      free: Sequence[str] = ("l_f_um", "fringe_amplitude"),
                      initial: Optional[Dict[str, float]] = None,
                      bounds: Optional[Dict[str, Tuple[float, float]]] = None,
                      fixed: Optional[Dict[str, float]] = None,
                      mode: str = "local", l_f_window_um: float = 0.5,
                      max_iter: int = 500) -> FitResult:
    """Fit the FP roundtrip-series visibility to a scan.

    Parameters: ``l_f_um``, ``finesse``, ``fringe_amplitude`` (the visibility
    ceiling ``2|T_sT_l|/(|T_s|²+|T_l|²)``; ``derived['arm_ratio']`` converts it
    to ``|T_l/T_s| ≤ 1``). A free ``l_f_um`` without an initial value is seeded
    from the scan's dominant oscillation period (one period = ``2 l_F``); the
    objective is multimodal in ``l_f`` on the quarter-wavelength scale, so a
    grid search over ``±l_f_window_um`` precedes the damped least squares.
    """
    omega2_0 = omega1_0 if omega2_0 is None else omega2_0
    initial = dict(initial or {})
    fixed = dict(fixed or {})
    fixed.setdefault("finesse", finesse)
    fixed.setdefault("fringe_amplitude", 1.0)
    bounds = {**_FP_DEFAULT_BOUNDS, **(bounds or {})}
    free = list(free)
    unknown = set(free) - {"l_f_um", "finesse", "fringe_amplitude"}
    if unknown:
        raise DomainError(f"unknown FP fit parameters {sorted(unknown)}")
    l_um = scan.l_ag * 1e6
    w = 1.0 if scan.sigma is None else 1.0 / scan.sigma**2

    derived = {}
    if "l_f_um" in free:
        if "l_f_um" not in initial:
            per = dominant_period(l_um, scan.values)
            noise = np.std(np.diff(scan.values)) / math.sqrt(2.0)
            if per.power_ratio < 20.0 or per.amplitude < max(1e-3, 2.0 * noise / math.sqrt(len(scan))):
                raise FitError("no detectable visibility modulation; l_f cannot be determined")
            if 3.0 * per.period > l_um[-1] - l_um[0]:
                raise FitError("scan covers fewer than 3 modulation periods; l_f cannot be determined")
            initial["l_f_um"] = 0.5 * per.period
            derived["fourier_period_um"] = per.period
        center = initial["l_f_um"]
        grid = np.linspace(center - l_f_window_um, center + l_f_window_um,
                           int(round(2 * l_f_window_um / 0.005)) + 1)
        fin = initial.get("finesse", fixed["finesse"])
        best = (np.inf, center, fixed["fringe_amplitude"])
        for lf in grid:
            e = fp_visibility(scan.l_ag, lf * 1e-6, fin, beta2, omega1_0, omega2_0, 1.0, "envelope")
            if "fringe_amplitude" in free:
                k = float(np.clip(np.sum(w * e * scan.values) / np.sum(w * e * e), 1e-6, 1.0))
            else:
                k = fixed["fringe_amplitude"]
            cost = float(np.sum(w * (k * e - scan.values) ** 2))
            if cost < best[0]:
                best = (cost, lf, k)
        initial["l_f_um"] = best[1]
        initial.setdefault("fringe_amplitude", best[2])
        bounds.setdefault("l_f_um", (best[1] - 0.02, best[1] + 0.02))
    elif "l_f_um" not in fixed:
        raise DomainError("l_f_um must be free or fixed")

    spec = {}
    for name in free:
        lo, hi = bounds[name]
        x0 = initial.get(name, fixed.get(name))
        if x0 is None:
            raise DomainError(f"no initial value for {name!r}")
        spec[name] = (float(np.clip(x0, lo, hi)), lo, hi)
    problem = FitProblem(scan, "fp_series", spec, {k: v for k, v in fixed.items() if k not in spec})
    names = list(problem.free)

    def model(p):
        q = {**problem.fixed, **p}
        return fp_visibility(scan.l_ag, q["l_f_um"] * 1e-6, q["finesse"], beta2,
                             omega1_0, omega2_0, q["fringe_amplitude"], mode)

    result = _run(model, names, [spec[k][0] for k in names], [spec[k][1] for k in names],
                  [spec[k][2] for k in names], scan, max_iter)
    k = result.estimates.get("fringe_amplitude", fixed["fringe_amplitude"])
    derived["arm_ratio"] = arm_ratio_from_amplitude(k)
    result.derived = derived
    return result


# -- synthetic data ---------------------------------------------------------------

def generate_synthetic_scan(model, l_ag, noise_sigma: float, seed: int,
                            mode: str = "local") -> VisibilityScan:
    """Forward-evaluate a model and add independent Gaussian noise.

    ``model`` is an :class:`InterferenceModel` or a callable mapping air-gap
    positions [m] to visibilities. Values are clamped to [0, 1].
    """
    if noise_sigma < 0:
        raise DomainError("noise_sigma must be >= 0")
    l_ag = np.asarray(l_ag, dtype=float)
    if isinstance(model, InterferenceModel):
        dt = airgap_to_delay(l_ag)
        v = model.visibility(dt) if mode == "envelope" else local_visibility(model, np.atleast_1d(dt))
    else:
        v = np.asarray(model(l_ag), dtype=float)
    rng = np.random.default_rng(seed)
    if noise_sigma > 0:
        v = v + rng.normal(0.0, noise_sigma, size=v.shape)
    v = np.clip(v, 0.0, 1.0)
    sigma = np.full(v.shape, noise_sigma) if noise_sigma > 0 else None
    return VisibilityScan(l_ag, v, "visibility", "computed", sigma)
