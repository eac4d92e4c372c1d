"""Hot-loop kernels with backend selection.

The compiled extension (``_kernels``) is used when it was built; otherwise the
numpy implementation in ``_kernels_py`` takes over. Both expose the same
functions and agree to rounding. Setting ``BIPHOTON_BACKEND=python`` in the
environment forces the fallback at import.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active = _BACKENDS.get(os.environ.get("BIPHOTON_BACKEND", "cython"), _kernels_py)

#: Hard cap on roundtrip terms per side of the series.
MAX_TERMS = 10000


def available_backends():
    return sorted(_BACKENDS)


def backend() -> str:
    return "cython" if _active is _compiled and _compiled is not None else "python"


def use_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}") from None


def series_half_width(dt, t0, beta2, decay, tol=1e-15):
    """Per-point number of roundtrip terms kept on each side of ``round(dt/t0)``.

    Terms left out are below ``tol`` either because of the Gaussian factor or
    because of ``decay**|n|``.
    """
    dt = np.asarray(dt, dtype=float)
    log_tol = -math.log(tol)
    k_gauss = math.ceil(0.5 + math.sqrt(4.0 * beta2 * log_tol) / t0)
    n_decay = math.ceil(log_tol / -math.log(decay)) if decay > 0 else 0
    nc = np.abs(np.floor(dt / t0 + 0.5)).astype(np.int64)
    k = np.minimum(k_gauss, nc + n_decay)
    return np.minimum(k, MAX_TERMS).astype(np.int64)


def fp_series_sum(dt, t0, phi0, decay, beta2, tol=1e-15):
    dt = np.asarray(dt, dtype=float)
    shape = dt.shape
    flat = np.ascontiguousarray(dt.ravel())
    k = np.ascontiguousarray(series_half_width(flat, t0, beta2, decay, tol), dtype=np.int_)
    phi0 = math.fmod(phi0, 2.0 * math.pi)
    return np.asarray(_active.fp_series_sum(flat, t0, phi0, decay, beta2, k)).reshape(shape)


def fp_transmittance(omega, kf, gamma, t_max):
    omega = np.asarray(omega, dtype=float)
    out = _active.fp_transmittance(np.ascontiguousarray(omega.ravel()), kf, gamma, t_max)
    return np.asarray(out).reshape(omega.shape)
