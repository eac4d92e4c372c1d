"""numpy implementations of the compiled kernels (fallback backend)."""
import math

import numpy as np

_CHUNK = 4096


def fp_series_sum(dt, t0, phi0, decay, beta2, half_width):
    dt = np.asarray(dt, dtype=float)
    half_width = np.asarray(half_width, dtype=np.int64)
    out = np.empty(dt.shape[0], dtype=np.complex128)
    if dt.shape[0] == 0:
        return out
    inv4b = 1.0 / (4.0 * beta2)
    ln_a = math.log(decay) if decay > 0 else -1e308
    kmax = int(half_width.max())
    j = np.arange(-kmax, kmax + 1)
    tab_re, tab_im = np.cos(j * phi0), np.sin(j * phi0)
    for s in range(0, dt.shape[0], _CHUNK):
        d = dt[s:s + _CHUNK]
        k = half_width[s:s + _CHUNK]
        nc = np.floor(d / t0 + 0.5).astype(np.int64)
        acc_re = np.zeros(d.shape[0])
        acc_im = np.zeros(d.shape[0])
        # column-ordered accumulation mirrors the compiled loop
        for col in range(j.size):
            live = np.abs(j[col]) <= k
            n = nc + j[col]
            x = d - n * t0
            e = -x * x * inv4b + np.where(n != 0, np.abs(n) * ln_a, 0.0)
            g = np.where(live, np.exp(e), 0.0)
            acc_re += g * tab_re[col]
            acc_im += g * tab_im[col]
        c0, s0 = np.cos(nc * phi0), np.sin(nc * phi0)
        out[s:s + _CHUNK] = (c0 * acc_re - s0 * acc_im) + 1j * (s0 * acc_re + c0 * acc_im)
    return out


def fp_transmittance(omega, kf, gamma, t_max):
    s = np.sin(kf * np.asarray(omega, dtype=float))
    return t_max / (1.0 + gamma * s * s)
