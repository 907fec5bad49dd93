"""The sinh-Gordon equation v_{z zbar} + sinh(2v)/2 = 0 and the minimal Lagrangian data it encodes.

With z = t + i s we have d_z d_zbar = (d_tt + d_ss) / 4.  A solution v yields
the conformal factor and associated Jacobian through e^{2u} = 4 cosh 2v and
2C = tanh 2v.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import special, taylor
from .errors import ConvergenceError, DomainError

DEFAULT_STEP = 1e-3
BLOWUP = 50.0


class DivergenceError(ConvergenceError):
    """The reduced ODE left the region |v| <= 50."""


@dataclass(frozen=True)
class SGField:
    """Samples ``v[i, j]`` at ``(t0 + i dt, s0 + j ds)``.

    A single column (``ns == 1``) is a t-line of an s-independent field.
    ``v_tt`` and ``v_ss`` optionally carry exact second derivatives.
    """

    v: np.ndarray
    dt: float
    ds: float = 1.0
    t0: float = 0.0
    s0: float = 0.0
    periodic: bool = False
    v_t: np.ndarray | None = None
    v_tt: np.ndarray | None = None
    v_ss: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.v, float)
        if v.ndim == 1:
            v = v[:, None]
        object.__setattr__(self, "v", v)
        if not np.all(np.isfinite(v)):
            raise DomainError("field contains non-finite values")

    @property
    def t(self):
        return self.t0 + self.dt * np.arange(self.v.shape[0])

    @property
    def s(self):
        return self.s0 + self.ds * np.arange(self.v.shape[1])

    @property
    def is_line(self):
        return self.v.shape[1] == 1


def _second_differences(f: SGField):
    """Central second differences; returns (v_tt, v_ss, interior mask)."""
    v = f.v
    nt, ns = v.shape
    if nt < 3 or (not f.is_line and ns < 3):
        raise DomainError("sinh-Gordon residual needs at least 3 nodes per axis")
    if f.periodic:
        vtt = (np.roll(v, -1, 0) - 2 * v + np.roll(v, 1, 0)) / f.dt**2
        vss = 0.0 if f.is_line else (np.roll(v, -1, 1) - 2 * v + np.roll(v, 1, 1)) / f.ds**2
        return vtt, vss, np.ones(v.shape, bool)
    vtt = np.zeros_like(v)
    vtt[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / f.dt**2
    mask = np.zeros(v.shape, bool)
    mask[1:-1] = True
    if f.is_line:
        return vtt, 0.0, mask
    vss = np.zeros_like(v)
    vss[:, 1:-1] = (v[:, 2:] - 2 * v[:, 1:-1] + v[:, :-2]) / f.ds**2
    mask[:, [0, -1]] = False
    return vtt, vss, mask


def _diff4(a, axis, step, periodic):
    """Fourth-order central first and second differences along ``axis`` (zero near open ends)."""
    def sh(k):
        return np.roll(a, -k, axis)

    d1 = (-sh(2) + 8 * sh(1) - 8 * sh(-1) + sh(-2)) / (12 * step)
    d2 = (-sh(2) + 16 * sh(1) - 30 * a + 16 * sh(-1) - sh(-2)) / (12 * step**2)
    if not periodic:
        idx = [slice(None)] * a.ndim
        for edge in (slice(0, 2), slice(-2, None)):
            idx[axis] = edge
            d1[tuple(idx)] = 0.0
            d2[tuple(idx)] = 0.0
    return d1, d2


def pointwise_residual(f: SGField, analytic: bool = False) -> np.ndarray:
    """|(v_tt + v_ss)/4 + sinh(2v)/2| at every node (NaN where no stencil is available)."""
    if analytic:
        if f.v_tt is None:
            raise DomainError("field carries no exact second derivatives")
        vtt = f.v_tt
        vss = 0.0 if f.v_ss is None else f.v_ss
        mask = np.ones(f.v.shape, bool)
    else:
        vtt, vss, mask = _second_differences(f)
    r = np.abs((vtt + vss) / 4.0 + np.sinh(2.0 * f.v) / 2.0)
    return np.where(mask, r, np.nan)


def sg_residual(f: SGField, analytic: bool = False) -> float:
    """Max over interior nodes of |(v_tt + v_ss)/4 + sinh(2v)/2|."""
    return float(np.nanmax(pointwise_residual(f, analytic)))


def lawson_v(t):
    """v(t) = log(sqrt3 dn(sqrt3 t)) with modulus 2 sqrt2 / 3; accepts arrays or jets."""
    _, _, dn = taylor.jacobi(math.sqrt(3.0) * t, special.KLEIN_MODULUS)
    return taylor.log(math.sqrt(3.0) * dn)


def lawson_period() -> float:
    """t-period 2K / sqrt3 of the Lawson solution."""
    return 2.0 * special.complete_K(special.KLEIN_MODULUS) / math.sqrt(3.0)


def lawson_field(n: int = 512, length: float | None = None, t0: float = 0.0) -> SGField:
    """The Lawson solution on an n-node t-line with exact first and second derivatives."""
    length = lawson_period() if length is None else length
    dt = length / (n - 1)
    t = t0 + dt * np.arange(n)
    T, _ = taylor.variables(t, 0.0 * t, 2)
    v = lawson_v(T)
    return SGField(v.value, dt, t0=t0, v_t=v.partial(1, 0)[:, None], v_tt=v.partial(2, 0)[:, None])


def _rhs(y):
    return np.array([y[1], -2.0 * math.sinh(2.0 * y[0])])


def integrate_reduced(v0: float, dv0: float, T: float, h: float = DEFAULT_STEP) -> SGField:
    """Classical RK4 for the s-independent reduction v'' = -2 sinh 2v on [0, T].

    The step is shortened so that an integer number of steps lands on T.
    """
    if h <= 0 or T <= 0:
        raise DomainError("step and interval length must be positive")
    n = max(1, int(math.ceil(T / h - 1e-9)))
    h = T / n
    out = np.empty((n + 1, 2))
    y = np.array([v0, dv0], float)
    out[0] = y
    for k in range(n):
        try:
            k1 = _rhs(y)
            k2 = _rhs(y + 0.5 * h * k1)
            k3 = _rhs(y + 0.5 * h * k2)
            k4 = _rhs(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        except OverflowError:
            y = np.array([math.inf, math.inf])
        if not abs(y[0]) <= BLOWUP:
            raise DivergenceError(f"|v| exceeded {BLOWUP} at t = {(k + 1) * h:.6g}", {"step": k + 1, "v": y[0]})
        out[k + 1] = y
    vtt = -2.0 * np.sinh(2.0 * out[:, 0])
    return SGField(out[:, 0], h, v_t=out[:, 1:2], v_tt=vtt[:, None])


def first_integral(f: SGField) -> np.ndarray:
    """(v')^2 / 2 + cosh 2v, conserved along solutions of the reduced equation."""
    if f.v_t is None:
        raise DomainError("field carries no first derivative")
    return 0.5 * f.v_t[:, 0] ** 2 + np.cosh(2.0 * f.v[:, 0])


def first_integral_drift(f: SGField) -> float:
    e = first_integral(f)
    return float(np.max(np.abs(e - e[0])))


@dataclass(frozen=True)
class Reconstruction:
    u: np.ndarray
    C: np.ndarray
    compat_residual: float
    gauss_residual: float
    algebraic_residual: float


def reconstruct(f: SGField) -> Reconstruction:
    """u = log(4 cosh 2v)/2 and C = tanh(2v)/2 with residuals of the compatibility system.

    The differential equation 2u_{z zbar} + e^{2u} C^2 - e^{4u}|C_z|^2/4 = 0 is
    checked with fourth-order central differences on interior nodes; the
    algebraic one, (1 - 4C^2) = 16 e^{-4u}, pointwise.
    """
    v = f.v
    u = 0.5 * np.log(4.0 * np.cosh(2.0 * v))
    C = 0.5 * np.tanh(2.0 * v)
    alg = float(np.max(np.abs((1.0 - 4.0 * C**2) - 16.0 * np.exp(-4.0 * u))))
    nt, ns = v.shape
    if nt < 5 or (not f.is_line and ns < 5):
        gauss = 0.0 if np.all(v == v.flat[0]) else float("nan")
    else:
        mask = np.ones(v.shape, bool)
        if not f.periodic:
            mask[:2] = mask[-2:] = False
            if not f.is_line:
                mask[:, :2] = mask[:, -2:] = False
        u_t, u_tt = _diff4(u, 0, f.dt, f.periodic)
        C_t, _ = _diff4(C, 0, f.dt, f.periodic)
        if f.is_line:
            u_ss, C_s = 0.0, 0.0
        else:
            _, u_ss = _diff4(u, 1, f.ds, f.periodic)
            C_s, _ = _diff4(C, 1, f.ds, f.periodic)
        Cz2 = (C_t**2 + C_s**2) / 4.0
        e2u = np.exp(2 * u)
        r = np.abs(2.0 * (u_tt + u_ss) / 4.0 + e2u * C**2 - e2u**2 * Cz2 / 4.0)
        gauss = float(np.max(r[mask]))
    return Reconstruction(u, C, max(gauss, alg), gauss, alg)


def write_csv(path, f: SGField, rec: Reconstruction | None = None) -> None:
    """Columns t, v, u, C (17 significant digits), first column of the field."""
    rec = rec or reconstruct(f)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "v", "u", "C"])
        for i, t in enumerate(f.t):
            w.writerow([f"{x:.17g}" for x in (t, f.v[i, 0], rec.u[i, 0], rec.C[i, 0])])
