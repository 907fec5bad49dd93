"""Ambient structure of S^2 x S^2 and pointwise/differential analyzers for surfaces in it.

Points are stored as 6-vectors ``(x1, x2, x3, y1, y2, y3)`` with the component
axis last, so every analyzer accepts arrays of parameter points and works on
whole grids at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import taylor
from .errors import DegeneracyError, DomainError, PreconditionError
from .surface import SurfaceSpec

FD_STEP_FIRST = 1e-4
FD_STEP_SECOND = 1e-3
LAGRANGIAN_GATE = 1e-6
TANGENCY_GATE = 1e-6
CONFORMAL_GATE = 1e-6

# five-point central stencils, fourth order
_W1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_W2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFSETS = np.arange(-2, 3)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _det3(a, b, c):
    return _dot(a, np.cross(b, c))


# ----------------------------------------------------------------------------
# ambient structure
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductPoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, float))
        object.__setattr__(self, "y", np.asarray(self.y, float))
        if abs(np.linalg.norm(self.x) - 1) > 1e-10 or abs(np.linalg.norm(self.y) - 1) > 1e-10:
            raise DomainError("product point factors must be unit vectors")

    @classmethod
    def from6(cls, p):
        p = np.asarray(p, float)
        return cls(p[:3], p[3:])

    def as6(self):
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class ProductTangent:
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v1", np.asarray(self.v1, float))
        object.__setattr__(self, "v2", np.asarray(self.v2, float))

    def as6(self):
        return np.concatenate([self.v1, self.v2])


def _check_tangent(p: ProductPoint, v: ProductTangent):
    r = max(abs(np.dot(p.x, v.v1)), abs(np.dot(p.y, v.v2)))
    if r > TANGENCY_GATE:
        raise PreconditionError(f"vector is not tangent to S^2 x S^2 (residual {r:.3g})")


def ambient_J(p: ProductPoint, v: ProductTangent) -> ProductTangent:
    """Product complex structure (x cross v1, y cross v2)."""
    _check_tangent(p, v)
    return ProductTangent(np.cross(p.x, v.v1), np.cross(p.y, v.v2))


def symplectic_form(p: ProductPoint, v: ProductTangent, w: ProductTangent) -> float:
    """Kaehler form <J v, w> = det(x, v1, w1) + det(y, v2, w2)."""
    _check_tangent(p, v)
    _check_tangent(p, w)
    return float(np.linalg.det(np.array([p.x, v.v1, w.v1])) + np.linalg.det(np.array([p.y, v.v2, w.v2])))


def J6(P, V):
    """Vectorized J on stacked 6-vectors."""
    return np.concatenate([np.cross(P[..., :3], V[..., :3]), np.cross(P[..., 3:], V[..., 3:])], axis=-1)


def omega6(P, V, W):
    return _det3(P[..., :3], V[..., :3], W[..., :3]) + _det3(P[..., 3:], V[..., 3:], W[..., 3:])


# ----------------------------------------------------------------------------
# jets
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ImmersionJet:
    P: np.ndarray
    d_t: np.ndarray
    d_s: np.ndarray
    d_tt: np.ndarray | None
    d_ts: np.ndarray | None
    d_ss: np.ndarray | None
    source: str
    partials: dict = field(default_factory=dict, repr=False)

    @property
    def point(self) -> ProductPoint:
        return ProductPoint.from6(self.P)

    def tangency_residual(self) -> np.ndarray:
        x, y = self.P[..., :3], self.P[..., 3:]
        return np.max(
            np.abs(np.stack([_dot(x, self.d_t[..., :3]), _dot(y, self.d_t[..., 3:]),
                             _dot(x, self.d_s[..., :3]), _dot(y, self.d_s[..., 3:])])),
            axis=0,
        )


def _parse_scheme(scheme):
    if isinstance(scheme, tuple):
        return scheme[0], float(scheme[1])
    if scheme in ("analytic", "fd"):
        return scheme, FD_STEP_FIRST
    raise ValueError(f"unknown jet scheme {scheme!r}")


def derivatives(surface: SurfaceSpec, t, s, order: int = 2, scheme="analytic", chart: int = 0) -> dict:
    """Partials ``{(a, b): d^a_t d^b_s X}`` of the position up to total order ``order``."""
    kind, h = _parse_scheme(scheme)
    ch = surface.charts[chart]
    t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
    if kind == "analytic":
        comps = ch.fn(*taylor.variables(t, s, order))
        return {
            (a, b): taylor.partials(comps, a, b) for a in range(order + 1) for b in range(order + 1 - a)
        }
    if order > 2:
        raise ValueError("finite-difference jets stop at second order")
    fn = lambda tt, ss: surface.eval(tt, ss, chart)  # noqa: E731
    D = {(0, 0): fn(t, s)}
    if order >= 1:
        d1 = fd_partials(fn, t, s, h, orders=((1, 0), (0, 1)))
        D.update(d1)
    if order >= 2:
        D.update(fd_partials(fn, t, s, 0.1 * math.sqrt(h), orders=((2, 0), (1, 1), (0, 2))))
    # renormalize the position and project first partials onto the factor tangent spaces
    P = D[(0, 0)]
    for sl in (slice(0, 3), slice(3, 6)):
        P[..., sl] /= np.linalg.norm(P[..., sl], axis=-1, keepdims=True)
        for key in ((1, 0), (0, 1)):
            if key in D:
                D[key][..., sl] -= _dot(D[key][..., sl], P[..., sl])[..., None] * P[..., sl]
    return D


def jet(surface: SurfaceSpec, q, scheme="analytic", chart: int = 0) -> ImmersionJet:
    """Position with first and second partials at parameter point(s) ``q = (t, s)``."""
    t, s = q
    kind, h = _parse_scheme(scheme)
    pad = 2.0 * 0.1 * math.sqrt(h) if kind == "fd" else 0.0
    surface.charts[chart].domain.check(t, s, pad)
    D = derivatives(surface, t, s, 2, scheme, chart)
    return ImmersionJet(D[(0, 0)], D[(1, 0)], D[(0, 1)], D[(2, 0)], D[(1, 1)], D[(0, 2)], kind, D)


def fd_partials(fn, t, s, h, orders=((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))) -> dict:
    """Fourth-order central-difference partials of a field sampled by ``fn(t, s)``.

    All stencil points are evaluated in a single batched call.
    """
    t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
    offs = [(i, j) for i in _OFFSETS for j in _OFFSETS]
    index = {o: k for k, o in enumerate(offs)}
    shape = (len(offs),) + (1,) * t.ndim
    di = np.array([o[0] for o in offs], float).reshape(shape)
    dj = np.array([o[1] for o in offs], float).reshape(shape)
    F = np.asarray(fn(t[None] + h * di, s[None] + h * dj))
    out = {}
    for key in orders:
        if key == (1, 0):
            out[key] = sum(_W1[i + 2] * F[index[(i, 0)]] for i in _OFFSETS) / h
        elif key == (0, 1):
            out[key] = sum(_W1[j + 2] * F[index[(0, j)]] for j in _OFFSETS) / h
        elif key == (2, 0):
            out[key] = sum(_W2[i + 2] * F[index[(i, 0)]] for i in _OFFSETS) / h**2
        elif key == (0, 2):
            out[key] = sum(_W2[j + 2] * F[index[(0, j)]] for j in _OFFSETS) / h**2
        elif key == (1, 1):
            out[key] = sum(_W1[i + 2] * _W1[j + 2] * F[index[(i, j)]] for i in _OFFSETS for j in _OFFSETS) / h**2
        else:
            raise ValueError(f"unsupported partial {key}")
    return out


# ----------------------------------------------------------------------------
# pointwise first-order geometry
# ----------------------------------------------------------------------------


class _Frame:
    """Induced metric, oriented orthonormal frame and derived first-order quantities."""

    def __init__(self, P, Xt, Xs):
        self.P, self.Xt, self.Xs = P, Xt, Xs
        self.x, self.y = P[..., :3], P[..., 3:]
        self.E, self.F, self.G = _dot(Xt, Xt), _dot(Xt, Xs), _dot(Xs, Xs)
        self.detg = self.E * self.G - self.F**2
        if np.any(self.detg <= 1e-12 * (self.E + self.G) ** 2):
            raise DegeneracyError("induced metric is degenerate at a sample point")
        sE = np.sqrt(self.E)
        r = np.sqrt(self.detg / self.E)
        # e1 = m00 Xt, e2 = m10 Xt + m11 Xs
        self.m00 = 1.0 / sE
        self.m10 = -self.F / (self.E * r)
        self.m11 = 1.0 / r
        self.e1 = self.m00[..., None] * Xt
        self.e2 = self.m10[..., None] * Xt + self.m11[..., None] * Xs

    @property
    def lagrangian_residual(self):
        return np.abs(omega6(self.P, self.Xt, self.Xs)) / np.sqrt(self.detg)

    @property
    def C(self):
        return _det3(self.x, self.e1[..., :3], self.e2[..., :3])

    def require_lagrangian(self):
        r = np.max(self.lagrangian_residual)
        if r > LAGRANGIAN_GATE:
            raise PreconditionError(f"surface is not Lagrangian here (residual {r:.3g})")

    def project_normal(self, V):
        """Component of V normal to the surface inside T(S^2 x S^2)."""
        V = V.copy()
        V[..., :3] -= _dot(V[..., :3], self.x)[..., None] * self.x
        V[..., 3:] -= _dot(V[..., 3:], self.y)[..., None] * self.y
        V -= _dot(V, self.e1)[..., None] * self.e1 + _dot(V, self.e2)[..., None] * self.e2
        return V


def _frame(D) -> _Frame:
    return _Frame(D[(0, 0)], D[(1, 0)], D[(0, 1)])


def _frame_of_jet(j: ImmersionJet) -> _Frame:
    return _Frame(j.P, j.d_t, j.d_s)


def first_form(j: ImmersionJet):
    """(g11, g12, g22) of the induced metric."""
    f = _frame_of_jet(j)
    return f.E, f.F, f.G


def lagrangian_residual(j: ImmersionJet):
    """|omega(d_t, d_s)| / sqrt(det g); zero exactly where the surface is Lagrangian."""
    return _frame_of_jet(j).lagrangian_residual


def associated_jacobian(j: ImmersionJet, frame_angle=None):
    """C = <J_x dphi(e1), dphi(e2)> for the oriented orthonormal frame of (d_t, d_s).

    ``frame_angle`` rotates the frame first; C does not depend on it.
    """
    f = _frame_of_jet(j)
    f.require_lagrangian()
    if frame_angle is None:
        return f.C
    c, s = np.cos(frame_angle), np.sin(frame_angle)
    c, s = np.asarray(c)[..., None], np.asarray(s)[..., None]
    a = c * f.e1 + s * f.e2
    b = -s * f.e1 + c * f.e2
    return _det3(f.x, a[..., :3], b[..., :3])


def rank_identity_residual(j: ImmersionJet):
    """max over factors of | |dphi e1|^2 + |dphi e2|^2 - 1 |."""
    f = _frame_of_jet(j)
    f.require_lagrangian()
    r1 = _dot(f.e1[..., :3], f.e1[..., :3]) + _dot(f.e2[..., :3], f.e2[..., :3]) - 1.0
    r2 = _dot(f.e1[..., 3:], f.e1[..., 3:]) + _dot(f.e2[..., 3:], f.e2[..., 3:]) - 1.0
    return np.maximum(np.abs(r1), np.abs(r2))


# ----------------------------------------------------------------------------
# second-order geometry
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalForms:
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    sigma: np.ndarray  # [..., k, i, j] = <sigma(e_i, e_j), n_k>
    H: np.ndarray
    C: np.ndarray
    K: np.ndarray
    sigma2: np.ndarray
    cubic: np.ndarray  # [..., i, j, k] = <sigma(e_i, e_j), J e_k>
    normal_frame: np.ndarray

    @property
    def H_norm(self):
        return np.linalg.norm(self.H, axis=-1)

    def cubic_symmetry_residual(self):
        c = self.cubic
        perms = [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1)]
        res = np.zeros(c.shape[:-3])
        for p in perms:
            pc = np.moveaxis(c, (-3, -2, -1), tuple(-3 + k for k in p))
            res = np.maximum(res, np.max(np.abs(c - pc), axis=(-3, -2, -1)))
        return res


def _sigma_param(fr: _Frame, D):
    """sigma(d_a, d_b) for (tt, ts, ss): second partial minus tangential and ambient-normal parts."""
    ginv = np.stack([fr.G, -fr.F, fr.E], axis=-1) / fr.detg[..., None]
    out = {}
    first = {0: fr.Xt, 1: fr.Xs}
    for key, (a, b) in (((2, 0), (0, 0)), ((1, 1), (0, 1)), ((0, 2), (1, 1))):
        V = D[key].copy()
        Xa, Xb = first[a], first[b]
        V[..., :3] += _dot(Xa[..., :3], Xb[..., :3])[..., None] * fr.x
        V[..., 3:] += _dot(Xa[..., 3:], Xb[..., 3:])[..., None] * fr.y
        vt, vs = _dot(V, fr.Xt), _dot(V, fr.Xs)
        ct = ginv[..., 0] * vt + ginv[..., 1] * vs
        cs = ginv[..., 1] * vt + ginv[..., 2] * vs
        out[key] = V - ct[..., None] * fr.Xt - cs[..., None] * fr.Xs
    return out


def _sigma_frame(fr: _Frame, sp):
    """sigma(e_i, e_j) in the orthonormal frame, as a dict {(i, j): 6-vector}."""
    m00, m10, m11 = (m[..., None] for m in (fr.m00, fr.m10, fr.m11))
    tt, ts, ss = sp[(2, 0)], sp[(1, 1)], sp[(0, 2)]
    s11 = m00**2 * tt
    s12 = m00 * (m10 * tt + m11 * ts)
    s22 = m10**2 * tt + 2 * m10 * m11 * ts + m11**2 * ss
    return {(0, 0): s11, (0, 1): s12, (1, 0): s12, (1, 1): s22}


def _normal_frame(fr: _Frame):
    """Orthonormal normal frame: (J e1, J e2) when Lagrangian, otherwise any orthonormal basis."""
    Je1, Je2 = J6(fr.P, fr.e1), J6(fr.P, fr.e2)
    n1 = fr.project_normal(Je1)
    l1 = np.linalg.norm(n1, axis=-1)
    u1 = n1 / np.maximum(l1, 1e-300)[..., None]
    n2 = fr.project_normal(Je2)
    n2 = n2 - _dot(n2, u1)[..., None] * u1
    l2 = np.linalg.norm(n2, axis=-1)
    good = (l1 > 1e-6) & (l2 > 1e-6)
    frame = np.stack([n1 / np.where(good, l1, 1.0)[..., None], n2 / np.where(good, l2, 1.0)[..., None]], axis=-2)
    if not np.all(good):
        bad = ~good
        Pb = fr.P[bad]
        proj = np.zeros(Pb.shape[:-1] + (6, 6))
        proj[...] = np.eye(6)
        for sl in (slice(0, 3), slice(3, 6)):
            v = np.zeros_like(Pb)
            v[..., sl] = Pb[..., sl]
            proj -= v[..., :, None] * v[..., None, :]
        for e in (fr.e1[bad], fr.e2[bad]):
            proj -= e[..., :, None] * e[..., None, :]
        w, vec = np.linalg.eigh(proj)
        frame[bad] = np.swapaxes(vec[..., :, -2:], -1, -2)
    return frame


def _forms_from(D, K) -> FundamentalForms:
    fr = _frame(D)
    sp = _sigma_param(fr, D)
    sf = _sigma_frame(fr, sp)
    H = 0.5 * (sf[(0, 0)] + sf[(1, 1)])
    sigma2 = sum(_dot(sf[k], sf[k]) for k in sf)
    nf = _normal_frame(fr)
    sigma = np.stack(
        [np.stack([np.stack([_dot(sf[(i, j)], nf[..., k, :]) for j in range(2)], -1) for i in range(2)], -2)
         for k in range(2)],
        -3,
    )
    Je = (J6(fr.P, fr.e1), J6(fr.P, fr.e2))
    cubic = np.stack(
        [np.stack([np.stack([_dot(sf[(i, j)], Je[k]) for k in range(2)], -1) for j in range(2)], -2)
         for i in range(2)],
        -3,
    )
    return FundamentalForms(fr.E, fr.F, fr.G, sigma, H, fr.C, K, sigma2, cubic, nf)


def second_form(surface: SurfaceSpec, q, scheme="analytic", chart: int = 0, curvature="auto") -> FundamentalForms:
    """Induced metric, second fundamental form, mean curvature, C and K at ``q``."""
    t, s = q
    kind, h = _parse_scheme(scheme)
    dom = surface.charts[chart].domain
    if kind == "analytic":
        dom.check(t, s)
        D = derivatives(surface, t, s, 3, scheme, chart)
        K = _brioschi(D)
        return _forms_from(D, K)
    dom.check(t, s, 2 * FD_STEP_SECOND)
    D = derivatives(surface, t, s, 2, scheme, chart)
    K = gauss_curvature(surface, q, scheme, chart, curvature)
    return _forms_from(D, K)


# ----------------------------------------------------------------------------
# intrinsic curvature
# ----------------------------------------------------------------------------


def _metric_partials(D):
    """E, F, G with first partials from position partials up to order 2 (and second ones if order 3)."""
    Xt, Xs = D[(1, 0)], D[(0, 1)]
    Xtt, Xts, Xss = D[(2, 0)], D[(1, 1)], D[(0, 2)]
    m = {
        "E": _dot(Xt, Xt), "F": _dot(Xt, Xs), "G": _dot(Xs, Xs),
        "Et": 2 * _dot(Xt, Xtt), "Es": 2 * _dot(Xt, Xts),
        "Ft": _dot(Xtt, Xs) + _dot(Xt, Xts), "Fs": _dot(Xts, Xs) + _dot(Xt, Xss),
        "Gt": 2 * _dot(Xs, Xts), "Gs": 2 * _dot(Xs, Xss),
    }
    if (2, 1) in D:
        Xtts, Xtss = D[(2, 1)], D[(1, 2)]
        m["Ess"] = 2 * (_dot(Xts, Xts) + _dot(Xt, Xtss))
        m["Gtt"] = 2 * (_dot(Xts, Xts) + _dot(Xs, Xtts))
        m["Fts"] = _dot(Xtts, Xs) + _dot(Xtt, Xss) + _dot(Xts, Xts) + _dot(Xt, Xtss)
    return m


def brioschi(m) -> np.ndarray:
    """Gauss curvature from E, F, G and their partials (keys as in ``_metric_partials``)."""
    E, F, G = m["E"], m["F"], m["G"]
    a = -0.5 * m["Ess"] + m["Fts"] - 0.5 * m["Gtt"]
    z = np.zeros_like(E)
    detA = _det3(np.stack([a, m["Fs"] - 0.5 * m["Gt"], 0.5 * m["Gs"]], -1),
                 np.stack([0.5 * m["Et"], E, F], -1),
                 np.stack([m["Ft"] - 0.5 * m["Es"], F, G], -1))
    detB = _det3(np.stack([z, 0.5 * m["Es"], 0.5 * m["Gt"]], -1),
                 np.stack([0.5 * m["Es"], E, F], -1),
                 np.stack([0.5 * m["Gt"], F, G], -1))
    return (detA - detB) / (E * G - F**2) ** 2


def _brioschi(D):
    return brioschi(_metric_partials(D))


def _is_conformal(E, F, G):
    return bool(np.all(np.abs(E - G) + np.abs(F) <= CONFORMAL_GATE * E))


def gauss_curvature(surface: SurfaceSpec, q, scheme="analytic", chart: int = 0, method="auto"):
    """Intrinsic Gauss curvature.

    ``analytic``: Brioschi formula on exact third-order jets.  ``fd``: metric
    sampled on a stencil of step 1e-3; the conformal formula ``-e^{-2u} Lap u``
    is used when the chart claims conformality and passes a numerical check,
    Brioschi otherwise (``method`` may force either).
    """
    t, s = q
    kind, _ = _parse_scheme(scheme)
    dom = surface.charts[chart].domain
    if kind == "analytic":
        dom.check(t, s)
        return _brioschi(derivatives(surface, t, s, 3, scheme, chart))
    h = FD_STEP_SECOND
    dom.check(t, s, 2 * h)

    def metric(tt, ss):
        D = derivatives(surface, tt, ss, 1, "analytic", chart)
        Xt, Xs = D[(1, 0)], D[(0, 1)]
        return np.stack([_dot(Xt, Xt), _dot(Xt, Xs), _dot(Xs, Xs)], axis=-1)

    g0 = metric(t, s)
    E, F, G = g0[..., 0], g0[..., 1], g0[..., 2]
    conformal = dom.conformal and _is_conformal(E, F, G)
    if method == "conformal" or (method == "auto" and conformal):
        if not conformal:
            raise PreconditionError("chart is not conformal")
        d = fd_partials(lambda a, b: 0.5 * np.log(metric(a, b)[..., 0]), t, s, h, ((2, 0), (0, 2)))
        return -(d[(2, 0)] + d[(0, 2)]) / E
    d = fd_partials(metric, t, s, h)
    m = {"E": E, "F": F, "G": G}
    for key, suffix in (((1, 0), "t"), ((0, 1), "s")):
        for k, name in enumerate("EFG"):
            m[name + suffix] = d[key][..., k]
    m["Ess"] = d[(0, 2)][..., 0]
    m["Gtt"] = d[(2, 0)][..., 2]
    m["Fts"] = d[(1, 1)][..., 1]
    return brioschi(m)


def gauss_equation_residual(surface: SurfaceSpec, q, scheme="analytic", chart: int = 0):
    """|K - 2C^2 - 2|H|^2 + |sigma|^2/2|."""
    ff = second_form(surface, q, scheme, chart)
    return np.abs(ff.K - 2 * ff.C**2 - 2 * _dot(ff.H, ff.H) + 0.5 * ff.sigma2)


# ----------------------------------------------------------------------------
# identities that need derivatives of derived fields
# ----------------------------------------------------------------------------


def _scalar_laplacian(m, d):
    """Laplace-Beltrami of a scalar with partials ``d`` in a metric with partials ``m``."""
    E, F, G = m["E"], m["F"], m["G"]
    det = E * G - F**2
    gi = ((G / det, -F / det), (-F / det, E / det))
    # Christoffel symbols of the first kind, Gam1[l][(i, j)]
    Gam1 = (
        {(0, 0): 0.5 * m["Et"], (0, 1): 0.5 * m["Es"], (1, 1): m["Fs"] - 0.5 * m["Gt"]},
        {(0, 0): m["Ft"] - 0.5 * m["Es"], (0, 1): 0.5 * m["Gt"], (1, 1): 0.5 * m["Gs"]},
    )
    fk = (d[(1, 0)], d[(0, 1)])
    fij = {(0, 0): d[(2, 0)], (0, 1): d[(1, 1)], (1, 1): d[(0, 2)]}
    lap = 0.0
    for i in range(2):
        for j in range(2):
            key = (min(i, j), max(i, j))
            corr = 0.0
            for k in range(2):
                Gk = gi[k][0] * Gam1[0][key] + gi[k][1] * Gam1[1][key]
                corr = corr + Gk * fk[k]
            lap = lap + gi[i][j] * (fij[key] - corr)
    grad2 = (G * fk[0] ** 2 - 2 * F * fk[0] * fk[1] + E * fk[1] ** 2) / det
    return lap, grad2


def _require(surface, flag, what):
    if not getattr(surface.expects, flag):
        raise PreconditionError(f"{surface.name} is not flagged {what}")


def c_identities_residual(surface: SurfaceSpec, q, chart: int = 0, h: float = FD_STEP_SECOND):
    """Residuals of |grad C|^2 = (1-4C^2)(2C^2-K)/2 and Lap C = -C(1+4C^2-4K).

    Derivatives of C come from a fourth-order stencil of step ``h`` over
    analytic first jets; the metric, Christoffel symbols and K are analytic.
    """
    _require(surface, "minimal", "minimal")
    _require(surface, "lagrangian", "Lagrangian")
    t, s = q
    surface.charts[chart].domain.check(t, s, 2 * h)

    def C_field(a, b):
        return _frame(derivatives(surface, a, b, 1, "analytic", chart)).C

    D = derivatives(surface, t, s, 3, "analytic", chart)
    m = _metric_partials(D)
    K = brioschi(m)
    C = _frame(D).C
    lap, grad2 = _scalar_laplacian(m, fd_partials(C_field, t, s, h))
    r1 = np.abs(grad2 - (1 - 4 * C**2) * (2 * C**2 - K) / 2)
    r2 = np.abs(lap + C * (1 + 4 * C**2 - 4 * K))
    return r1, r2


def hopf_theta(D):
    """Theta = <phi_z, phi_z> with z = t + i s, from first partials."""
    pt, ps = D[(1, 0)][..., :3], D[(0, 1)][..., :3]
    return (_dot(pt, pt) - _dot(ps, ps) - 2j * _dot(pt, ps)) / 4.0


def hopf_residual(surface: SurfaceSpec, q, chart: int = 0, h: float = FD_STEP_SECOND):
    """(|d_zbar Theta|, |16|Theta|^2 - e^{4u}(1-4C^2)|) on a conformal minimal Lagrangian chart."""
    _require(surface, "minimal", "minimal")
    _require(surface, "lagrangian", "Lagrangian")
    dom = surface.charts[chart].domain
    if not dom.conformal:
        raise PreconditionError("Hopf differential needs a conformal chart")
    t, s = q
    dom.check(t, s, 2 * h)
    D = derivatives(surface, t, s, 1, "analytic", chart)
    fr = _frame(D)
    if not _is_conformal(fr.E, fr.F, fr.G):
        raise PreconditionError("chart fails the numerical conformality check")

    def theta_field(a, b):
        th = hopf_theta(derivatives(surface, a, b, 1, "analytic", chart))
        return np.stack([th.real, th.imag], axis=-1)

    d = fd_partials(theta_field, t, s, h, ((1, 0), (0, 1)))
    dzbar = 0.5 * ((d[(1, 0)][..., 0] - d[(0, 1)][..., 1]) + 1j * (d[(1, 0)][..., 1] + d[(0, 1)][..., 0]))
    theta = hopf_theta(D)
    mod = np.abs(16 * np.abs(theta) ** 2 - fr.E**2 * (1 - 4 * fr.C**2))
    return np.abs(dzbar), mod


def parallel_H_residual(surface: SurfaceSpec, q, chart: int = 0, h: float = FD_STEP_SECOND):
    """max over the orthonormal frame of |normal part of the derivative of H|."""
    t, s = q
    surface.charts[chart].domain.check(t, s, 2 * h)

    def H_field(a, b):
        D = derivatives(surface, a, b, 2, "analytic", chart)
        fr = _frame(D)
        sf = _sigma_frame(fr, _sigma_param(fr, D))
        return 0.5 * (sf[(0, 0)] + sf[(1, 1)])

    d = fd_partials(H_field, t, s, h, ((1, 0), (0, 1)))
    fr = _frame(derivatives(surface, t, s, 1, "analytic", chart))
    nt = fr.project_normal(d[(1, 0)])
    ns = fr.project_normal(d[(0, 1)])
    r1 = np.linalg.norm(fr.m00[..., None] * nt, axis=-1)
    r2 = np.linalg.norm(fr.m10[..., None] * nt + fr.m11[..., None] * ns, axis=-1)
    return np.maximum(r1, r2)


# ----------------------------------------------------------------------------
# global integrals
# ----------------------------------------------------------------------------


def _integral(surface: SurfaceSpec, n: int, integrand, inset: float = 0.0):
    total = 0.0
    for k, ch in enumerate(surface.charts):
        T, S, W = ch.domain.grid(n, n, inset)
        D = derivatives(surface, T, S, 1, "analytic", k)
        fr = _frame(D)
        total += float(np.sum(integrand(fr) * np.sqrt(fr.detg) * W))
    return total


def _richardson(surface, n, integrand, richardson):
    coarse = _integral(surface, n, integrand)
    if not richardson:
        return coarse
    fine = _integral(surface, 2 * n, integrand)
    return (4.0 * fine - coarse) / 3.0


def area(surface: SurfaceSpec, n: int = 64, richardson: bool = True) -> float:
    """Midpoint-rule area over all charts, Richardson-extrapolated from n and 2n cells."""
    return _richardson(surface, n, lambda fr: 1.0, richardson)


def degree(surface: SurfaceSpec, n: int = 64, richardson: bool = True) -> float:
    """(1 / 4 pi) * integral of C dA over a compact orientable surface."""
    for ch in surface.charts:
        if not ch.domain.orientable:
            raise PreconditionError("degree needs an orientable domain; use the double cover")
        if ch.domain.gluing in ("plane", "cylinder"):
            raise PreconditionError("degree needs a compact domain")

    def integrand(fr):
        fr.require_lagrangian()
        return fr.C

    return _richardson(surface, n, integrand, richardson) / (4.0 * math.pi)
