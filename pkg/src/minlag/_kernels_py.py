"""Numpy fallback for the compiled kernels (same signatures as ``_kernels.pyx``)."""

import numpy as np


def landen_sncndn(x, a, c, quarter):
    """sn, cn, dn at every entry of ``x`` from a precomputed AGM table (a_n, c_n)."""
    x = np.asarray(x, dtype=float)
    period = 4.0 * quarter
    xr = x - period * np.floor(x / period + 0.5) if period > 0 else x
    N = len(a) - 1
    phi = np.ldexp(a[N], N) * xr
    for k in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[k] / a[k] * np.sin(phi)))
    sn = np.sin(phi)
    return sn, np.cos(phi), np.sqrt(1.0 - c[0] * c[0] * sn * sn)


def stencil_apply(diag, nbr, coef, x):
    """out_i = diag_i x_i + sum_k coef_ik x_{nbr_ik}; ``x`` may be (n,) or (n, b)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return diag * x + np.einsum("nk,nk->n", coef, x[nbr])
    return diag[:, None] * x + np.einsum("nk,nkb->nb", coef, x[nbr])
