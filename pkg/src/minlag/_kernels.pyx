# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Landen-descent Jacobi functions and 5-point stencil products.

Signatures mirror ``_kernels_py`` exactly; ``_backend`` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, floor, fabs

cnp.import_array()


def landen_sncndn(x, const double[::1] a, const double[::1] c, double quarter):
    """sn, cn, dn at every entry of ``x`` from a precomputed AGM table (a_n, c_n).

    Same descending Landen transformation as the fallback, run in its algebraic
    form: one sin/cos pair per point, then a division-only ascent through the
    table, instead of one arcsine per level.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], i
    cdef int N = a.shape[0] - 1, k
    cdef double period = 4.0 * quarter
    cdef double xr, u, s, co, d, A, C, B
    b_arr = np.empty(N + 1)
    cdef double[::1] b = b_arr
    b[0] = sqrt((a[0] - c[0]) * (a[0] + c[0]))
    for k in range(N):
        b[k + 1] = sqrt(a[k] * b[k])
    sn = np.empty(n)
    cn = np.empty(n)
    dn = np.empty(n)
    cdef double[::1] snv = sn, cnv = cn, dnv = dn, xv = xs
    with nogil:
        for i in range(n):
            xr = xv[i]
            if period > 0.0:
                xr = xr - period * floor(xr / period + 0.5)
            if fabs(xr) < 1e-8:
                # the cotangent ascent overflows near zero; the series is exact here
                u = xr * xr
                snv[i] = xr * (1.0 - (1.0 + c[0] * c[0]) * u / 6.0)
                cnv[i] = 1.0 - 0.5 * u
                dnv[i] = 1.0 - 0.5 * c[0] * c[0] * u
                continue
            u = a[N] * xr
            s = sin(u)
            co = cos(u)
            d = 1.0
            if s != 0.0:
                A = co / s
                C = a[N] * A
                for k in range(N - 1, -1, -1):
                    B = a[k]
                    A = A * C
                    C = C * d
                    d = (b[k] + A) / (B + A)
                    A = C / B
                A = 1.0 / sqrt(C * C + 1.0)
                s = A if s >= 0.0 else -A
                co = C * s
            snv[i] = s
            cnv[i] = co
            dnv[i] = d
    shape = np.shape(x)
    return sn.reshape(shape), cn.reshape(shape), dn.reshape(shape)


def stencil_apply(const double[::1] diag, const cnp.int64_t[:, ::1] nbr,
                  const double[:, ::1] coef, x):
    """out_i = diag_i x_i + sum_k coef_ik x_{nbr_ik}; ``x`` may be (n,) or (n, b)."""
    cdef cnp.ndarray xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = diag.shape[0], m = nbr.shape[1], i, k, j, b
    cdef double acc
    cdef double[::1] x1, o1
    cdef double[:, ::1] x2, o2
    if xa.ndim == 1:
        out = np.empty(n)
        x1 = xa
        o1 = out
        with nogil:
            for i in range(n):
                acc = diag[i] * x1[i]
                for k in range(m):
                    acc = acc + coef[i, k] * x1[nbr[i, k]]
                o1[i] = acc
        return out
    b = xa.shape[1]
    out = np.empty((n, b))
    x2 = xa
    o2 = out
    with nogil:
        for i in range(n):
            for j in range(b):
                o2[i, j] = diag[i] * x2[i, j]
            for k in range(m):
                for j in range(b):
                    o2[i, j] = o2[i, j] + coef[i, k] * x2[nbr[i, k], j]
    return out
