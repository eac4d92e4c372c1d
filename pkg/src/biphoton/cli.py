"""Command-line front end.

Exit codes: 0 success, 2 input or schema error, 3 numeric failure,
4 fit did not converge or is ill-posed.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analysis import dominant_period, half_max_width, half_min_width, modulation_depth
from .errors import DomainError, FitError, NumericError
from .fitting import FitResult, fit_fp_visibility, fit_gaussian_envelope
from .hom import HomModel, hom_general_quadrature, hom_interference_term_gaussian_profile
from .mzi import (
    VisibilityScan,
    beta2_from_widths,
    build_model,
    envelope_fwhm_airgap,
    evaluate_scan,
)
from .scenario import Scenario, ScenarioError, load_fit_config, load_scenario
from .spectra import FilterChain, fp_free_spectral_range, gaussian_compose, gaussian_profile
from .units import (
    C,
    angular_frequency_to_wavelength,
    fwhm_wavelength_to_sigma,
    wavelength_to_angular_frequency,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_FIT = 0, 2, 3, 4
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig7")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(header: Sequence[str], columns: Sequence[np.ndarray], out: Optional[Path]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- computations shared by subcommands and reproduce -------------------------------

def scan_columns(sc: Scenario, threads: int = 1, noise: float = 0.0, seed: Optional[int] = None):
    if sc.scan is None:
        raise ScenarioError(f"{sc.name}: scenario has no [scan] table")
    model = build_model(sc.source, sc.signal_chain, sc.idler_chain, sc.mzi, sc.scan.method)
    table = evaluate_scan(model, sc.scan.points(), threads)
    header = ["l_ag_um", "delta_t_s", "rho", "r_n_max", "r_n_min", "visibility"]
    cols = [table.l_ag * 1e6, table.delta_t, table.rho, table.r_max, table.r_min, table.visibility]
    if noise > 0:
        if seed is None:
            raise ScenarioError("--noise requires an explicit --seed")
        rng = np.random.default_rng(seed)
        cols[-1] = np.clip(table.visibility + rng.normal(0.0, noise, table.visibility.shape), 0.0, 1.0)
        header.append("sigma")
        cols.append(np.full(table.visibility.shape, noise))
    return header, cols, model, table


def hom_columns(sc: Scenario):
    if sc.hom is None:
        raise ScenarioError(f"{sc.name}: scenario has no [hom] table")
    path = sc.hom.points()
    dt = path / C
    prof = gaussian_profile(sc.source, sc.signal_chain, sc.idler_chain)
    method = sc.hom.method
    if method == "auto":
        method = "quadrature" if prof.fabry_perots else "gaussian"
    if method == "gaussian":
        if prof.fabry_perots:
            raise ScenarioError("hom.method 'gaussian' cannot include a Fabry-Perot filter")
        nu_bar = prof.nu_bar - (0.5 * sc.source.omega_p - sc.source.omega1_0)
        rho = hom_interference_term_gaussian_profile(prof.beta2, nu_bar, dt)
    elif method == "quadrature":
        model = HomModel.from_source(sc.source, sc.signal_chain, sc.idler_chain)
        rho = hom_general_quadrature(model, dt)
    else:
        raise ScenarioError(f"hom.method {method!r} is not available for HOM scans")
    rho = np.atleast_1d(rho)
    return ["path_diff_um", "delta_t_s", "rho_hom", "r_n"], [path * 1e6, dt, rho, 1.0 - rho]


def spectrum_columns(sc: Scenario, arm: str = "signal", span_nm: float = 20.0, step_nm: float = 0.01):
    src = sc.source
    omega0, sigma, chain = ((src.omega1_0, src.sigma_geo1, sc.signal_chain) if arm == "signal"
                            else (src.omega2_0, src.sigma_geo2, sc.idler_chain))
    lam0 = angular_frequency_to_wavelength(omega0) * 1e9
    n = int(round(span_nm / step_nm))
    lam = lam0 - 0.5 * span_nm + step_nm * np.arange(n + 1)
    omega = wavelength_to_angular_frequency(lam * 1e-9)
    geo = np.ones_like(omega) if sigma is None else np.exp(-(((omega - omega0) / sigma) ** 2))
    t = geo * (chain.transmittance(omega) if len(chain) else 1.0)
    return ["lambda_nm", "transmittance"], [lam, t], geo


# -- fit input -----------------------------------------------------------------------

def read_scan_csv(path) -> VisibilityScan:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CliError(f"{path}: cannot read ({exc.strerror})", EXIT_INPUT) from None
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if not rows:
        raise CliError(f"{path}: empty file", EXIT_INPUT)
    header = [h.strip() for h in rows[0]]
    for col in ("l_ag_um", "visibility"):
        if col not in header:
            raise CliError(f"{path}: missing column {col!r}", EXIT_INPUT)
    il, iv = header.index("l_ag_um"), header.index("visibility")
    isg = header.index("sigma") if "sigma" in header else None
    data = []
    for lineno, r in enumerate(rows[1:], start=2):
        try:
            vals = [float(r[il]), float(r[iv])] + ([float(r[isg])] if isg is not None else [])
        except (ValueError, IndexError):
            raise CliError(f"{path}:{lineno}: malformed row {r!r}", EXIT_INPUT) from None
        data.append(vals)
    if not data:
        raise CliError(f"{path}: no data rows", EXIT_INPUT)
    arr = np.array(data)
    arr = arr[np.argsort(arr[:, 0], kind="stable")]
    try:
        return VisibilityScan(arr[:, 0] * 1e-6, arr[:, 1], "visibility", "measured",
                              arr[:, 2] if isg is not None else None)
    except DomainError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def run_fit_config(scan: VisibilityScan, config) -> FitResult:
    if config.model == "gaussian_envelope":
        free = None
        if config.free:
            free = {}
            defaults = {"amplitude": (1.0, 0.0, 1.0), "fwhm_um": (100.0, 1e-3, 1e5),
                        "center_um": (0.0, float(scan.l_ag[0] * 1e6), float(scan.l_ag[-1] * 1e6))}
            for k, v in config.free.items():
                x0, lo, hi = defaults[k]
                free[k] = (v.get("initial", x0), v.get("lower", lo), v.get("upper", hi))
        return fit_gaussian_envelope(scan, config.center_wavelength, free=free)
    omega1 = wavelength_to_angular_frequency(config.center_wavelength)
    omega_p = wavelength_to_angular_frequency(config.pump_wavelength)
    s2 = fwhm_wavelength_to_sigma(config.idler_geometric_fwhm, config.center_wavelength)
    inv1 = 0.0
    if config.signal_geometric_fwhm is not None:
        inv1 += fwhm_wavelength_to_sigma(config.signal_geometric_fwhm, config.center_wavelength) ** -2
    if config.model == "fp_plus_filter":
        inv1 += fwhm_wavelength_to_sigma(config.signal_filter_fwhm, config.center_wavelength) ** -2
    beta2 = inv1 + s2**-2
    free = list(config.free) or ["l_f_um", "fringe_amplitude"]
    initial = {k: v["initial"] for k, v in config.free.items() if "initial" in v}
    bounds = {k: (v["lower"], v["upper"]) for k, v in config.free.items() if "lower" in v and "upper" in v}
    fixed = dict(config.fixed)
    return fit_fp_visibility(scan, fixed.get("finesse", initial.get("finesse", 150.0)), beta2, omega1,
                             omega_p - omega1, free=free, initial=initial, bounds=bounds, fixed=fixed)


def format_report(result: FitResult, model: str) -> str:
    lines = [f"model: {model}", f"{'parameter':<20}{'estimate':>24}{'uncertainty':>24}"]
    for k, v in result.estimates.items():
        lines.append(f"{k:<20}{v:>24.12g}{result.uncertainties.get(k, float('nan')):>24.6g}")
    for k, v in result.derived.items():
        lines.append(f"{k:<20}{float(v):>24.12g}{'(derived)':>24}")
    lines += [f"residual_sum_squares: {result.rss:.6g}", f"iterations: {result.n_iter}",
              f"method: {result.method}",
              f"converged: {'yes' if result.converged else 'NO (result is not authoritative)'}",
              f"message: {result.message}", ""]
    kv = [f"model={model}"]
    kv += [f"{k}={fmt(v)}" for k, v in result.estimates.items()]
    kv += [f"{k}_unc={fmt(v)}" for k, v in result.uncertainties.items()]
    kv += [f"{k}={fmt(v)}" for k, v in result.derived.items()]
    kv += [f"rss={fmt(result.rss)}", f"iterations={result.n_iter}",
           f"converged={str(result.converged).lower()}"]
    return "\n".join(lines + kv) + "\n"


# -- reproduce ------------------------------------------------------------------------

class Row:
    def __init__(self, quantity, computed, reference=None, unit=""):
        self.quantity, self.computed, self.reference, self.unit = quantity, computed, reference, unit

    @property
    def deviation(self):
        if self.reference is None or isinstance(self.computed, str):
            return None
        return 100.0 * (self.computed - self.reference) / self.reference


def _scan(name, out, threads):
    sc = load_scenario(name)
    header, cols, model, table = scan_columns(sc, threads)
    write_csv(header, cols, out / f"{name}.csv")
    return sc, model, table


def reproduce(fig: str, out: Path, threads: int = 1) -> List[Row]:
    rows: List[Row] = []
    if fig == "fig2":
        for name, reference in (("fig2_nofilter", 160.0), ("fig2_filter", 350.0), ("fig2_filter_composed", 350.0)):
            sc, model, table = _scan(name, out, threads)
            rows.append(Row(f"{name} envelope FWHM (scan)", half_max_width(table.l_ag * 1e6, table.visibility), reference, "um"))
            rows.append(Row(f"{name} envelope FWHM (closed form)", envelope_fwhm_airgap(model.beta2) * 1e6, reference, "um"))
        sigma = fwhm_wavelength_to_sigma(5.3e-9, 826.2e-9)
        rows.append(Row("geometric spectral width sigma", sigma, None, "rad/s"))
    elif fig == "fig3":
        depths = {}
        for name, lf in (("fig3_fp_9500", 95.00), ("fig3_fp", 94.86), ("fig3_fp_9480", 94.80)):
            sc, model, table = _scan(name, out, threads)
            depths[lf] = modulation_depth(model, 1e-3, 2 * lf * 1e-6)
            rows.append(Row(f"modulation depth at 1 mm, l_F={lf:.2f} um", depths[lf], None, ""))
            if lf == 94.86:
                per = dominant_period(table.l_ag * 1e6, table.visibility)
                rows.append(Row("visibility modulation period", per.period, 2 * lf, "um"))
                fit = fit_fp_visibility(VisibilityScan(table.l_ag, np.clip(table.visibility, 0, 1)),
                                        150.0, model.beta2, sc.source.omega1_0, sc.source.omega2_0)
                rows.append(Row("fitted l_F (F=150 fixed)", fit.estimates["l_f_um"], 94.86, "um"))
        order = depths[94.80] > depths[94.86] > depths[95.00]
        rows.append(Row("depth ordering 94.80 > 94.86 > 95.00", "yes" if order else "NO", None, ""))
        fsr = fp_free_spectral_range(load_scenario("fig3_fp_9500").signal_chain.filters[0], 826.2e-9)
        rows.append(Row("free spectral range at l_F=95.00 um", fsr.wavelength * 1e9, 3.6, "nm"))
    elif fig == "fig4":
        sc = load_scenario("fig4_spectrum")
        header, cols, geo = spectrum_columns(sc, "signal", 20.0, 0.005)
        write_csv(header, cols, out / "fig4_spectrum.csv")
        write_csv(["lambda_nm", "transmittance"], [cols[0], geo], out / "fig4_geometric.csv")
        fp = sc.signal_chain.filters[0]
        rows.append(Row("free spectral range at l_F=94.86 um", fp_free_spectral_range(fp, 826.2e-9).wavelength * 1e9, 3.6, "nm"))
        lam, t = cols
        peaks = [i for i in range(1, t.size - 1) if t[i] > t[i - 1] and t[i] >= t[i + 1] and t[i] > 0.01]
        for i in peaks:
            rows.append(Row(f"transmission peak at {lam[i]:.3f} nm", t[i], None, ""))
    elif fig == "fig5":
        sc, model, table = _scan("fig5_fp_plus_filter", out, threads)
        per = dominant_period(table.l_ag * 1e6, table.visibility)
        rows.append(Row("oscillation amplitude at dominant period", per.amplitude, None, ""))
        rows.append(Row("modulation depth at 1 mm", modulation_depth(model, 1e-3, 2 * 95.03e-6), None, ""))
        v = table.visibility
        rows.append(Row("visibility at 1 mm", float(np.interp(1000.0, table.l_ag * 1e6, v)), None, ""))
        rows.append(Row("visibility at 3 mm", float(v[-1]), None, ""))
        ref = load_scenario("fig2_nofilter")
        ref_beta = gaussian_profile(ref.source, ref.signal_chain, ref.idler_chain).beta2
        rows.append(Row("no-filter envelope FWHM for comparison", envelope_fwhm_airgap(ref_beta) * 1e6, 160.0, "um"))
    elif fig == "fig7":
        sc = load_scenario("fig7_hom")
        header, cols = hom_columns(sc)
        write_csv(header, cols, out / "fig7_hom.csv")
        width = half_min_width(cols[0], cols[3])
        rows.append(Row("HOM dip FWHM (scan)", width, 72.0, "um"))
        sigma = sc.source.sigma_geo1
        closed = 2 * C * math.sqrt(2 * math.log(2)) / sigma
        rows.append(Row("HOM dip FWHM (closed form)", closed * 1e6, 72.0, "um"))
        rows.append(Row("coherence time (dip FWHM / c)", closed / C * 1e15, 240.0, "fs"))
        mz = envelope_fwhm_airgap(beta2_from_widths(sigma, sigma))
        rows.append(Row("dip FWHM / MZ envelope FWHM", closed / mz, 0.5, ""))
    else:
        raise CliError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}", EXIT_INPUT)
    _write_summary(rows, out / "summary.csv")
    return rows


def _write_summary(rows: List[Row], path: Path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "computed", "reference", "unit", "deviation_pct"])
    for r in rows:
        comp = r.computed if isinstance(r.computed, str) else fmt(r.computed)
        w.writerow([r.quantity, comp, "" if r.reference is None else fmt(r.reference), r.unit,
                    "" if r.deviation is None else f"{r.deviation:.2f}"])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


def format_summary(rows: List[Row]) -> str:
    out = [f"{'quantity':<46}{'computed':>16}{'ref':>10}  {'unit':<6}{'dev %':>8}"]
    for r in rows:
        comp = r.computed if isinstance(r.computed, str) else f"{r.computed:.6g}"
        reference = "" if r.reference is None else f"{r.reference:g}"
        dev = "" if r.deviation is None else f"{r.deviation:+.2f}"
        out.append(f"{r.quantity:<46}{comp:>16}{reference:>10}  {r.unit:<6}{dev:>8}")
    return "\n".join(out) + "\n"


# -- argument parsing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True,
                            help="scenario TOML file, or the name of a bundled scenario")
        sp.add_argument("--out", type=Path, help="output path (default: standard output)")
        sp.add_argument("--format", choices=["csv"], default="csv")

    sp = sub.add_parser("scan", help="MZ visibility scan over air-gap positions")
    common(sp)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--noise", type=float, default=0.0,
                    help="add Gaussian noise of this standard deviation to the visibility column")
    sp.add_argument("--seed", type=int, help="RNG seed (required with --noise)")

    sp = sub.add_parser("hom", help="Hong-Ou-Mandel dip over path differences")
    common(sp)

    sp = sub.add_parser("spectrum", help="filtered single-photon spectrum of one arm")
    common(sp)
    sp.add_argument("--arm", choices=["signal", "idler"], default="signal")
    sp.add_argument("--span-nm", type=float, default=20.0)
    sp.add_argument("--step-nm", type=float, default=0.01)

    sp = sub.add_parser("fit", help="fit a model to a visibility scan CSV")
    sp.add_argument("scan_csv", type=Path)
    sp.add_argument("--config", type=Path, help="fit configuration TOML")
    sp.add_argument("--out", type=Path, help="also write the report to this file")
    sp.add_argument("--format", choices=["csv"], default="csv")

    sp = sub.add_parser("reproduce", help="recompute a figure and compare headline values")
    sp.add_argument("figure", help=", ".join(FIGURES))
    sp.add_argument("--out", type=Path, help="output directory (default: ./reproduce_<figure>)")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--format", choices=["csv"], default="csv")
    return p


def _dispatch(args) -> int:
    if args.command == "scan":
        if args.threads < 1:
            raise CliError("--threads must be >= 1", EXIT_INPUT)
        if args.noise < 0:
            raise CliError("--noise must be >= 0", EXIT_INPUT)
        header, cols, _, _ = scan_columns(load_scenario(args.scenario), args.threads, args.noise, args.seed)
        write_csv(header, cols, args.out)
    elif args.command == "hom":
        header, cols = hom_columns(load_scenario(args.scenario))
        write_csv(header, cols, args.out)
    elif args.command == "spectrum":
        if args.span_nm <= 0 or args.step_nm <= 0:
            raise CliError("--span-nm and --step-nm must be positive", EXIT_INPUT)
        header, cols, _ = spectrum_columns(load_scenario(args.scenario), args.arm, args.span_nm, args.step_nm)
        write_csv(header, cols, args.out)
    elif args.command == "fit":
        scan = read_scan_csv(args.scan_csv)
        if args.config is not None:
            config = load_fit_config(args.config)
        else:
            from .scenario import parse_fit_config
            config = parse_fit_config({"schema_version": 1, "model": "gaussian_envelope"})
        try:
            result = run_fit_config(scan, config)
        except FitError as exc:
            raise CliError(f"ill-posed fit: {exc}", EXIT_FIT) from None
        report = format_report(result, config.model)
        sys.stdout.write(report)
        if args.out is not None:
            args.out.write_text(report, encoding="utf-8")
        return EXIT_OK if result.converged else EXIT_FIT
    elif args.command == "reproduce":
        if args.figure not in FIGURES:
            raise CliError(f"unknown figure {args.figure!r}; choose from {', '.join(FIGURES)}", EXIT_INPUT)
        out = args.out or Path(f"reproduce_{args.figure}")
        rows = reproduce(args.figure, out, args.threads)
        sys.stdout.write(format_summary(rows))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ScenarioError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
