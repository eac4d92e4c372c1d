# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Must stay numerically interchangeable with _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin, log, floor

cnp.import_array()


def fp_series_sum(const double[::1] dt, double t0, double phi0, double decay,
                  double beta2, const long[::1] half_width):
    """Sum over roundtrips n of decay^|n| e^{i n phi0} e^{-(dt - n t0)^2 / (4 beta2)}.

    Terms are taken around nc = round(dt/t0): n = nc + j, |j| <= half_width.
    e^{i n phi0} = e^{i nc phi0} e^{i j phi0} with the second factor tabulated,
    and decay^|n| is folded into the Gaussian exponent.
    """
    cdef Py_ssize_t i, m = dt.shape[0]
    cdef long j, n, nc, k, kmax = 0
    cdef double x, g, e, acc_re, acc_im, c0, s0
    cdef double inv4b = 1.0 / (4.0 * beta2)
    cdef double ln_a = log(decay) if decay > 0 else -1e308
    for i in range(m):
        if half_width[i] > kmax:
            kmax = half_width[i]
    tab_re_a = np.empty(2 * kmax + 1)
    tab_im_a = np.empty(2 * kmax + 1)
    cdef double[::1] tab_re = tab_re_a
    cdef double[::1] tab_im = tab_im_a
    for j in range(-kmax, kmax + 1):
        tab_re[j + kmax] = cos(j * phi0)
        tab_im[j + kmax] = sin(j * phi0)
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    for i in range(m):
        nc = <long>floor(dt[i] / t0 + 0.5)
        k = half_width[i]
        acc_re = 0.0
        acc_im = 0.0
        for j in range(-k, k + 1):
            n = nc + j
            x = dt[i] - n * t0
            e = -x * x * inv4b
            if n != 0:
                e += (n if n > 0 else -n) * ln_a
            g = exp(e)
            acc_re += g * tab_re[j + kmax]
            acc_im += g * tab_im[j + kmax]
        c0 = cos(nc * phi0)
        s0 = sin(nc * phi0)
        o[i] = (c0 * acc_re - s0 * acc_im) + 1j * (s0 * acc_re + c0 * acc_im)
    return out


def fp_transmittance(const double[::1] omega, double kf, double gamma, double t_max):
    cdef Py_ssize_t i, m = omega.shape[0]
    cdef double s
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(m):
        s = sin(kf * omega[i])
        o[i] = t_max / (1.0 + gamma * s * s)
    return out
