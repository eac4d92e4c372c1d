"""Scenario and fit-configuration files (TOML, ``schema_version = 1``).

Unknown keys are rejected so that a typo cannot silently change the physics.
Lengths are given in µm/nm in the file and converted to SI on load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import DomainError
from .mzi import MachZehnder
from .spectra import BiphotonSource, FabryPerotFilter, FilterChain, GaussianFilter
from .units import fwhm_wavelength_to_sigma, wavelength_to_angular_frequency

SCHEMA_VERSION = 1
BUNDLED = ("fig2_nofilter", "fig2_filter", "fig2_filter_composed", "fig3_fp", "fig3_fp_9500",
           "fig3_fp_9480", "fig4_spectrum", "fig5_fp_plus_filter", "fig7_hom")
METHODS = ("auto", "gaussian", "series", "quadrature")


class ScenarioError(DomainError):
    """Schema violation in a scenario or fit-configuration file."""


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    step: float
    method: str = "auto"

    def points(self):
        import numpy as np

        if self.stop == self.start:
            return np.array([self.start])
        n = int(math.floor((self.stop - self.start) / self.step * (1 + 1e-12))) + 1
        return self.start + self.step * np.arange(n)


@dataclass(frozen=True)
class Scenario:
    name: str
    source: BiphotonSource
    signal_chain: FilterChain
    idler_chain: FilterChain
    mzi: MachZehnder
    scan: Optional[Grid]  # air-gap grid [m]
    hom: Optional[Grid]  # path-difference grid [m]
    description: str = ""


def _expect(table: Dict[str, Any], where: str, required=(), optional=()):
    if not isinstance(table, dict):
        raise ScenarioError(f"{where}: expected a table")
    allowed = set(required) | set(optional)
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"{where}: unknown key {key!r} (allowed: {', '.join(sorted(allowed))})")
    for key in required:
        if key not in table:
            raise ScenarioError(f"{where}: missing required key {key!r}")


def _num(table, key, where, positive=False, default=None):
    if key not in table:
        if default is not None:
            return default
        raise ScenarioError(f"{where}: missing required key {key!r}")
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{where}.{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ScenarioError(f"{where}.{key}: must be positive, got {v!r}")
    return float(v)


def _str(table, key, where, choices, default):
    v = table.get(key, default)
    if v not in choices:
        raise ScenarioError(f"{where}.{key}: expected one of {choices}, got {v!r}")
    return v


def load_toml(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read file ({exc.strerror})") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"{path}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    return data


def _filters(items, where, lam_center) -> List:
    if not isinstance(items, list):
        raise ScenarioError(f"{where}: expected an array of tables")
    out = []
    for i, item in enumerate(items):
        w = f"{where}[{i}]"
        if not isinstance(item, dict) or "type" not in item:
            raise ScenarioError(f"{w}: each filter needs a 'type'")
        kind = item["type"]
        if kind == "gaussian":
            _expect(item, w, ("type", "fwhm_nm"), ("center_nm",))
            center = _num(item, "center_nm", w, True, lam_center * 1e9) * 1e-9
            fwhm = _num(item, "fwhm_nm", w, True) * 1e-9
            out.append(GaussianFilter(wavelength_to_angular_frequency(center),
                                      fwhm_wavelength_to_sigma(fwhm, center)))
        elif kind == "fabry_perot":
            _expect(item, w, ("type", "l_f_um", "finesse"), ("t_max",))
            t_max = _num(item, "t_max", w, True, 1.0)
            out.append(FabryPerotFilter(_num(item, "l_f_um", w, True) * 1e-6,
                                        _num(item, "finesse", w, True), t_max))
        else:
            raise ScenarioError(f"{w}.type: expected 'gaussian' or 'fabry_perot', got {kind!r}")
    return out


def _grid(table, where, prefix) -> Grid:
    _expect(table, where, (f"{prefix}_start_um", f"{prefix}_stop_um", "step_um"), ("method",))
    start = _num(table, f"{prefix}_start_um", where) * 1e-6
    stop = _num(table, f"{prefix}_stop_um", where) * 1e-6
    step = _num(table, "step_um", where, True) * 1e-6
    if stop < start:
        raise ScenarioError(f"{where}: {prefix}_stop_um must not be below {prefix}_start_um")
    return Grid(start, stop, step, _str(table, "method", where, METHODS, "auto"))


def parse_scenario(data: Dict[str, Any], name: str = "scenario") -> Scenario:
    _expect(data, name, ("schema_version", "source"),
            ("name", "description", "signal_filters", "idler_filters", "mzi", "scan", "hom"))
    src = data["source"]
    w = "source"
    _expect(src, w, ("pump_nm",), ("signal_center_nm", "idler_center_nm", "signal_geometric_fwhm_nm",
                                   "idler_geometric_fwhm_nm", "crystal_length_mm",
                                   "group_velocity_m_per_s"))
    lam_p = _num(src, "pump_nm", w, True) * 1e-9
    lam_1 = _num(src, "signal_center_nm", w, True, 2e9 * lam_p) * 1e-9
    lam_2 = _num(src, "idler_center_nm", w, True, 2e9 * lam_p) * 1e-9
    if abs((1 / lam_1 + 1 / lam_2) * lam_p - 1.0) > 1e-9:
        raise ScenarioError(f"{w}: centers violate 1/signal + 1/idler = 1/pump")
    omega_p = wavelength_to_angular_frequency(lam_p)
    omega1 = wavelength_to_angular_frequency(lam_1)
    s1 = src.get("signal_geometric_fwhm_nm")
    s2 = src.get("idler_geometric_fwhm_nm")
    sig1 = None if s1 is None else fwhm_wavelength_to_sigma(_num(src, "signal_geometric_fwhm_nm", w, True) * 1e-9, lam_1)
    sig2 = None if s2 is None else fwhm_wavelength_to_sigma(_num(src, "idler_geometric_fwhm_nm", w, True) * 1e-9, lam_2)
    length = _num(src, "crystal_length_mm", w, True) * 1e-3 if "crystal_length_mm" in src else None
    v_g = _num(src, "group_velocity_m_per_s", w, True) if "group_velocity_m_per_s" in src else None
    source = BiphotonSource(omega_p, omega1, omega_p - omega1, sig1, sig2, length, v_g)
    signal = FilterChain(_filters(data.get("signal_filters", []), "signal_filters", lam_1))
    idler = FilterChain(_filters(data.get("idler_filters", []), "idler_filters", lam_2))
    m = data.get("mzi", {})
    _expect(m, "mzi", (), ("arm_ratio", "arm_phase_deg"))
    ratio = _num(m, "arm_ratio", "mzi", default=1.0)
    if ratio <= 0:
        raise ScenarioError("mzi.arm_ratio: must be positive")
    mzi = MachZehnder.from_ratio(ratio, _num(m, "arm_phase_deg", "mzi", default=0.0))
    has_scan, has_hom = "scan" in data, "hom" in data
    if has_scan == has_hom:
        raise ScenarioError(f"{name}: exactly one of the [scan] and [hom] tables must be present")
    scan = _grid(data["scan"], "scan", "l_ag") if has_scan else None
    hom = _grid(data["hom"], "hom", "path") if has_hom else None
    label = data.get("name", name)
    if not isinstance(label, str):
        raise ScenarioError("name: expected a string")
    return Scenario(label, source, signal, idler, mzi, scan, hom, str(data.get("description", "")))


def bundled_path(name: str) -> Path:
    ref = resources.files("biphoton") / "scenarios" / f"{name}.toml"
    return Path(str(ref))


def load_scenario(path_or_name) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    p = Path(path_or_name)
    if not p.exists() and str(path_or_name) in BUNDLED:
        p = bundled_path(str(path_or_name))
    try:
        return parse_scenario(load_toml(p), p.stem)
    except ScenarioError:
        raise
    except DomainError as exc:
        raise ScenarioError(f"{p}: {exc}") from None


# -- fit configuration ----------------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    model: str
    center_wavelength: float
    pump_wavelength: float
    signal_geometric_fwhm: Optional[float]
    idler_geometric_fwhm: Optional[float]
    signal_filter_fwhm: Optional[float]
    fixed: Dict[str, float]
    free: Dict[str, Dict[str, float]]


_FIT_PARAMS = {
    "gaussian_envelope": ("amplitude", "fwhm_um", "center_um"),
    "fp_series": ("l_f_um", "finesse", "fringe_amplitude"),
    "fp_plus_filter": ("l_f_um", "finesse", "fringe_amplitude"),
}


def parse_fit_config(data: Dict[str, Any]) -> FitConfig:
    _expect(data, "fit", ("schema_version", "model"), ("spectrum", "fixed", "free"))
    model = _str(data, "model", "fit", tuple(_FIT_PARAMS), None)
    spec = data.get("spectrum", {})
    _expect(spec, "spectrum", (), ("center_nm", "pump_nm", "signal_geometric_fwhm_nm",
                                   "idler_geometric_fwhm_nm", "signal_filter_fwhm_nm"))
    center = _num(spec, "center_nm", "spectrum", True, 826.2) * 1e-9
    pump = _num(spec, "pump_nm", "spectrum", True, center * 0.5e9) * 1e-9

    def opt(key):
        return _num(spec, key, "spectrum", True) * 1e-9 if key in spec else None

    names = _FIT_PARAMS[model]
    fixed = data.get("fixed", {})
    _expect(fixed, "fixed", (), names)
    fixed = {k: _num(fixed, k, "fixed") for k in fixed}
    free = data.get("free", {})
    _expect(free, "free", (), names)
    parsed = {}
    for k, v in free.items():
        _expect(v, f"free.{k}", (), ("initial", "lower", "upper"))
        parsed[k] = {kk: _num(v, kk, f"free.{k}") for kk in v}
        if k in fixed:
            raise ScenarioError(f"parameter {k!r} is both fixed and free")
    if model != "gaussian_envelope":
        if opt("signal_geometric_fwhm_nm") is None and opt("signal_filter_fwhm_nm") is None:
            raise ScenarioError("spectrum: FP fits need signal_geometric_fwhm_nm or signal_filter_fwhm_nm")
        if opt("idler_geometric_fwhm_nm") is None:
            raise ScenarioError("spectrum: FP fits need idler_geometric_fwhm_nm")
        if "finesse" not in fixed and "finesse" not in parsed:
            raise ScenarioError("finesse must be fixed or free")
    if model == "fp_plus_filter" and opt("signal_filter_fwhm_nm") is None:
        raise ScenarioError("spectrum: fp_plus_filter needs signal_filter_fwhm_nm")
    return FitConfig(model, center, pump, opt("signal_geometric_fwhm_nm"),
                     opt("idler_geometric_fwhm_nm"), opt("signal_filter_fwhm_nm"), fixed, parsed)


def load_fit_config(path) -> FitConfig:
    return parse_fit_config(load_toml(path))
