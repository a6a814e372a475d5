# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: trigonometric interpolation and monotone inversion.

Same signatures and conventions as ``_kernels_py``.  Powers of e^{ix} are
generated by complex recurrence instead of per-mode trig calls.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, M_PI, isfinite

cnp.import_array()


def interp_rfft(coeffs, Py_ssize_t n, x):
    cdef double complex[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t m = xs.shape[0], d = c.shape[1], K = n // 2 + 1
    out = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] w = np.empty(K, dtype=np.float64)
    cdef Py_ssize_t i, k, j
    cdef double zr, zi, pr, pi_, tr, acc
    for k in range(K):
        w[k] = 2.0 / n
    w[0] = 1.0 / n
    w[K - 1] = 1.0 / n
    for i in range(m):
        zr = cos(xs[i])
        zi = sin(xs[i])
        pr = 1.0
        pi_ = 0.0
        for k in range(K):
            if k > 0 and k % 16 == 0:
                # refresh to stop recurrence drift
                pr = cos(k * xs[i])
                pi_ = sin(k * xs[i])
            for j in range(d):
                o[i, j] += w[k] * (c[k, j].real * pr - c[k, j].imag * pi_)
            tr = pr * zr - pi_ * zi
            pi_ = pr * zi + pi_ * zr
            pr = tr
    return out


cdef inline void _eval_pd(const double complex[::1] q, double[::1] w,
                          Py_ssize_t K, double x, double* val, double* der) nogil:
    cdef double zr = cos(x), zi = sin(x), pr = 1.0, pi_ = 0.0, tr
    cdef double v = 0.0, dv = 0.0, re, im
    cdef Py_ssize_t k
    for k in range(K):
        if k > 0 and k % 16 == 0:
            pr = cos(k * x)
            pi_ = sin(k * x)
        re = q[k].real * pr - q[k].imag * pi_
        im = q[k].real * pi_ + q[k].imag * pr
        v += w[k] * re
        dv -= w[k] * k * im
        tr = pr * zr - pi_ * zi
        pi_ = pr * zi + pi_ * zr
        pr = tr
    val[0] = v
    der[0] = dv


def monotone_inverse(coeffs, Py_ssize_t n, targets, double tol=1e-13, int maxiter=100):
    cdef double complex[::1] q = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef double[::1] y = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t K = n // 2 + 1, m = y.shape[0], i, k, a, b, mid
    cdef double[::1] w = np.empty(K, dtype=np.float64)
    for k in range(K):
        w[k] = 2.0 / n
    w[0] = 1.0 / n
    w[K - 1] = 1.0 / n
    cdef double[::1] g = np.empty(n + 1, dtype=np.float64)
    cdef double h = 2.0 * M_PI / n, val, der, lo, hi, flo, fhi, x, f, xn
    for i in range(n + 1):
        _eval_pd(q, w, K, i * h, &val, &der)
        g[i] = i * h + val
    g[0] = 0.0
    g[n] = 2.0 * M_PI
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef int it
    with nogil:
        for i in range(m):
            # last grid index with g <= y
            a = 0
            b = n
            while b - a > 1:
                mid = (a + b) // 2
                if g[mid] <= y[i]:
                    a = mid
                else:
                    b = mid
            lo = a * h
            hi = (a + 1) * h
            flo = g[a] - y[i]
            fhi = g[a + 1] - y[i]
            if fhi - flo > 0:
                x = lo - flo * (hi - lo) / (fhi - flo)
            else:
                x = lo
            for it in range(maxiter):
                _eval_pd(q, w, K, x, &val, &der)
                f = x + val - y[i]
                if fabs(f) <= tol:
                    break
                if f < 0:
                    lo = x
                else:
                    hi = x
                if hi - lo <= 4e-16 * (fabs(x) if fabs(x) > 1.0 else 1.0):
                    break
                xn = x - f / (1.0 + der)
                if not isfinite(xn) or xn <= lo or xn >= hi:
                    xn = 0.5 * (lo + hi)
                x = xn
            o[i] = x
    return out
