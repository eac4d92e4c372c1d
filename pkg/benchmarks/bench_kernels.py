"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Times the FP roundtrip-series sum over a fig3-sized scan (including the
64-sample fringe windows used by the visibility extraction) and the FP
transmittance over a dense frequency grid, and checks that both backends
return the same numbers.
"""
import argparse
import time

import numpy as np

from biphoton import kernels
from biphoton.mzi import MachZehnder, build_model, evaluate_scan
from biphoton.spectra import BiphotonSource, FabryPerotFilter, FilterChain


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    src = BiphotonSource.degenerate(413.1e-9, 5.3e-9, 5.3e-9)
    fp = FabryPerotFilter(94.86e-6, 150.0)
    model = build_model(src, FilterChain((fp,)), None, MachZehnder(1.0, 1.0), "series")
    p = model.params
    dt = np.linspace(0.0, 3e-3 / 2.99792458e8, 200_000)
    omega = np.linspace(2.2e15, 2.35e15, 2_000_000)
    l_ag = np.arange(0.0, 3000e-6 + 1e-9, 2e-6)

    cases = {
        "series sum, 200k delays": lambda: kernels.fp_series_sum(dt, p.t0, p.phi0, p.decay, model.beta2),
        "FP transmittance, 2M freqs": lambda: fp.transmittance(omega),
        "visibility scan, 1501 points": lambda: evaluate_scan(model, l_ag).visibility,
    }
    backends = kernels.available_backends()
    results = {}
    print(f"{'case':<32}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        row = {}
        for b in backends:
            kernels.use_backend(b)
            row[b] = best_of(fn, args.repeat)
        results[name] = row
        speed = (f"{row['python'][0] / row['cython'][0]:>9.1f}x" if "cython" in row else f"{'n/a':>10}")
        print(f"{name:<32}" + "".join(f"{row[b][0] * 1e3:>12.1f}ms" for b in backends) + speed)
    if "cython" in backends:
        for name, row in results.items():
            a, b = row["python"][1], row["cython"][1]
            diff = np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300)
            print(f"max relative difference, {name}: {diff:.1e}")


if __name__ == "__main__":
    main()
