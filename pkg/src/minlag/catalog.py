"""Explicit Lagrangian surfaces of S^2 x S^2 and the R^4 immersions whose Gauss maps land there.

Every evaluator is a closed-form expression built from :mod:`minlag.taylor`
functions, so the analyzers get exact jets of any order from the same code
that produces positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import special, taylor
from .domains import ParamDomain
from .errors import DegeneracyError, DomainError
from .geometry import _det3, _dot, derivatives
from .surface import Chart, Expectations, SurfaceSpec, transform

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi

# stereographic atlas: two unit disks meeting along the equator
SPHERE_DISK = ParamDomain((-1.0, 1.0), (-1.0, 1.0), "disk", conformal=True, radius=1.0)


def _zero_like(t):
    return 0.0 * t


def stereo_north(t, s):
    r2 = t * t + s * s
    d = 1.0 + r2
    return (2.0 * t / d, 2.0 * s / d, (1.0 - r2) / d)


def stereo_south(t, s):
    # the reflected s keeps the outward orientation of the sphere
    r2 = t * t + s * s
    d = 1.0 + r2
    return (2.0 * t / d, -2.0 * s / d, (r2 - 1.0) / d)


SPHERE_CHARTS = (("north", stereo_north), ("south", stereo_south))


# ----------------------------------------------------------------------------
# curves and products
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceCurve:
    """A curve in the unit sphere; ``fn`` accepts arrays or jets and returns three components."""

    name: str
    fn: Callable
    period: float | None = None

    def eval(self, t):
        return taylor.values(self.fn(np.asarray(t, float)))

    def derivative(self, t):
        t = np.asarray(t, float)
        T, _ = taylor.variables(t, t, 1)
        return taylor.partials(self.fn(T), 1, 0)


def great_circle() -> SpaceCurve:
    return SpaceCurve("great", lambda t: (_zero_like(t), taylor.cos(t), taylor.sin(t)), TWO_PI)


def latitude_circle(h: float) -> SpaceCurve:
    """The circle x1 = h, parametrized by arc length."""
    if not -1.0 < h < 1.0:
        raise DomainError("latitude height must lie in (-1, 1)")
    r = math.sqrt(1.0 - h * h)
    return SpaceCurve(
        f"lat={h:g}", lambda t: (_zero_like(t) + h, r * taylor.cos(t / r), r * taylor.sin(t / r)), TWO_PI * r
    )


def wobbly_circle(eps: float) -> SpaceCurve:
    """Normalization of (cos t, sin t, eps sin 3t): a closed curve that is not a circle."""

    def fn(t):
        a, b, c = taylor.cos(t), taylor.sin(t), eps * taylor.sin(3.0 * t)
        inv = taylor.power(a * a + b * b + c * c, -0.5)
        return (a * inv, b * inv, c * inv)

    return SpaceCurve(f"wobble={eps:g}", fn, TWO_PI)


def parse_curve(text: str) -> SpaceCurve:
    if text == "great":
        return great_circle()
    key, _, val = text.partition("=")
    try:
        x = float(val)
    except ValueError as exc:
        raise DomainError(f"bad curve spec {text!r}") from exc
    if key == "lat":
        return latitude_circle(x)
    if key == "wobble":
        return wobbly_circle(x)
    raise DomainError(f"unknown curve {text!r}; use great, lat=h or wobble=eps")


def make_product_of_curves(alpha: SpaceCurve, beta: SpaceCurve, name: str | None = None) -> SurfaceSpec:
    """(t, s) -> (alpha(t), beta(s)); Lagrangian with C = 0 for any pair of spherical curves."""
    geodesic = alpha.name == "great" and beta.name == "great"
    # both circle families are parametrized by arc length, so the chart is conformal
    circles = all(c.name == "great" or c.name.startswith("lat=") for c in (alpha, beta))
    if alpha.period and beta.period:
        dom = ParamDomain((0.0, alpha.period), (0.0, beta.period), "torus", conformal=circles)
    else:
        dom = ParamDomain((0.0, alpha.period or 1.0), (0.0, beta.period or 1.0), "plane", conformal=circles)

    def fn(t, s):
        return tuple(alpha.fn(t)) + tuple(beta.fn(s))

    exp = Expectations(
        lagrangian=True,
        minimal=geodesic,
        conformal=circles,
        constant_C=0.0,
        constant_K=0.0 if circles else None,
        orientable=True,
        compact=dom.compact,
        genus=1 if dom.compact else None,
        betti1=2 if dom.compact else None,
        degree=0 if dom.compact else None,
        parallel_H=circles,
        totally_geodesic=geodesic,
    )
    return SurfaceSpec(name or f"product:{alpha.name}:{beta.name}", (Chart("main", dom, fn),), exp)


def make_T() -> SurfaceSpec:
    """The totally geodesic flat torus x1 = y1 = 0 (product of two great circles)."""
    surf = make_product_of_curves(great_circle(), great_circle(), "torus-t")
    return SurfaceSpec(surf.name, surf.charts, surf.expects, "product of great circles x1 = y1 = 0")


def make_T_ab(a: float, b: float) -> SurfaceSpec:
    """Product of the latitude circles x1 = a and y1 = b (parallel mean curvature when a^2 + b^2 > 0)."""
    if a * a + b * b == 0.0:
        raise DomainError("a = b = 0 gives the totally geodesic torus; use make_T")
    if not (0.0 <= a < 1.0 and 0.0 <= b < 1.0):
        raise DomainError("torus-ab parameters must lie in [0, 1)")
    surf = make_product_of_curves(latitude_circle(a), latitude_circle(b), f"torus-ab:{a:g}:{b:g}")
    return SurfaceSpec(surf.name, surf.charts, surf.expects, "product of latitude circles")


def T_ab_mean_curvature(a: float, b: float) -> float:
    """|H| of the latitude-circle product from the geodesic curvatures h / sqrt(1 - h^2)."""
    return 0.5 * math.sqrt(a * a / (1 - a * a) + b * b / (1 - b * b))


# ----------------------------------------------------------------------------
# sphere and graphs
# ----------------------------------------------------------------------------


def make_M0() -> SurfaceSpec:
    """{(x, -x)}: totally geodesic Lagrangian sphere with C = 1/2, K = 1/2, area 8 pi."""

    def mk(chart):
        def fn(t, s):
            x = chart(t, s)
            return tuple(x) + tuple(-c for c in x)

        return fn

    charts = tuple(Chart(n, SPHERE_DISK, mk(f)) for n, f in SPHERE_CHARTS)
    exp = Expectations(
        lagrangian=True, minimal=True, constant_C=0.5, constant_K=0.5, conformal=True, orientable=True,
        genus=0, euler=2, betti1=0, degree=1, area=8 * math.pi, totally_geodesic=True, compact=True,
    )
    return SurfaceSpec("m0", charts, exp, "graph of the antipodal map")


@dataclass(frozen=True)
class SphereMap:
    """A map S^2 -> S^2 written on R^3 components (jets welcome)."""

    name: str
    fn: Callable


def antipodal() -> SphereMap:
    return SphereMap("antipodal", lambda x: tuple(-c for c in x))


def identity_map() -> SphereMap:
    return SphereMap("identity", lambda x: tuple(x))


def _rotation(axis, angle):
    axis = np.asarray(axis, float)
    axis /= np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def rotated_antipodal(axis=(1.0, 2.0, 2.0), angle: float = 0.7) -> SphereMap:
    R = _rotation(axis, angle)
    return SphereMap(
        "rotation-antipodal", lambda x: tuple(-sum(R[i, k] * x[k] for k in range(3)) for i in range(3))
    )


def twist_map(lam: float) -> SphereMap:
    """x -> -F(x) where F rotates each latitude z by pi + kappa atanh(z), kappa = sqrt(1-4 lam^2)/lam."""
    kappa = math.sqrt(1.0 - 4.0 * lam * lam) / lam

    def fn(x):
        th = kappa * taylor.atanh(x[2])
        c, s = taylor.cos(th), taylor.sin(th)
        return (c * x[0] - s * x[1], s * x[0] + c * x[1], -x[2])

    return SphereMap(f"twist({lam:g})", fn)


def make_graph(F: SphereMap, name: str | None = None, lagrangian: bool = True) -> SurfaceSpec:
    """x -> (x, F(x)) over the stereographic atlas."""

    def mk(chart):
        def fn(t, s):
            x = chart(t, s)
            return tuple(x) + tuple(F.fn(x))

        return fn

    charts = tuple(Chart(n, SPHERE_DISK, mk(f)) for n, f in SPHERE_CHARTS)
    exp = Expectations(lagrangian=lagrangian, conformal=False, orientable=True, genus=0, euler=2, compact=True)
    return SurfaceSpec(name or f"graph-{F.name}", charts, exp, f"graph of the {F.name} map")


def _orthonormal_pair(x):
    x = np.asarray(x, float)
    helper = np.where(np.abs(x[..., :1]) < 0.9, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    v = helper - _dot(helper, x)[..., None] * x
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return v, np.cross(x, v)


def area_preserving_residual(F: SphereMap, x) -> np.ndarray:
    """|omega0(v, w) + omega0(dF v, dF w)| for an oriented orthonormal pair (v, w) at x.

    Zero exactly where the graph of F is Lagrangian.
    """
    x = np.asarray(x, float)
    v, w = _orthonormal_pair(x)
    T, S = taylor.variables(np.zeros(x.shape[:-1]), np.zeros(x.shape[:-1]), 1)
    curve = tuple(x[..., k] + T * v[..., k] + S * w[..., k] for k in range(3))
    out = F.fn(curve)
    Fx, dFv, dFw = (taylor.partials(out, a, b) for a, b in ((0, 0), (1, 0), (0, 1)))
    if np.any(np.linalg.norm(np.cross(dFv, dFw), axis=-1) < 1e-12):
        raise DegeneracyError("dF is rank deficient at a sample")
    return np.abs(_det3(x, v, w) + _det3(Fx, dFv, dFw))


def make_constant_C_graph(lam: float, margin: float = 0.05) -> SurfaceSpec:
    """Lagrangian graph over the sphere minus poles with C = lam (not minimal).

    Parameters are (a, z): longitude and height of the first factor.
    """
    if not 0.0 < lam < 0.5:
        raise DomainError("constant-C graphs need 0 < lambda < 1/2")
    kappa = math.sqrt(1.0 - 4.0 * lam * lam) / lam

    def fn(a, z):
        r = taylor.sqrt(1.0 - z * z)
        th = a + kappa * taylor.atanh(z)
        return (r * taylor.cos(a), r * taylor.sin(a), z, r * taylor.cos(th), r * taylor.sin(th), -z)

    dom = ParamDomain((0.0, TWO_PI), (-1.0, 1.0), "cylinder", margin=margin)
    exp = Expectations(lagrangian=True, minimal=False, constant_C=lam, orientable=True)
    return SurfaceSpec(f"const-c:{lam:g}", (Chart("main", dom, fn),), exp, "twisted graph with constant C")


# ----------------------------------------------------------------------------
# immersions in R^4 and their Gauss maps
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class R4Immersion:
    name: str
    charts: tuple  # Chart objects whose fn returns four components
    in_S3: bool = True
    oriented: bool = True
    minimal: bool = True
    genus: int | None = None
    description: str = ""

    @property
    def domain(self):
        return self.charts[0].domain

    def eval(self, t, s, chart: int = 0):
        return taylor.values(self.charts[chart].fn(np.asarray(t, float), np.asarray(s, float)))

    def partials(self, t, s, order: int = 2, chart: int = 0) -> dict:
        t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
        comps = self.charts[chart].fn(*taylor.variables(t, s, order))
        return {(a, b): taylor.partials(comps, a, b) for a in range(order + 1) for b in range(order + 1 - a)}

    def unit_normal_in_S3(self, t, s, chart: int = 0):
        D = self.partials(t, s, 1, chart)
        return _s3_normal(D[(0, 0)], D[(1, 0)], D[(0, 1)])


def _cross4(a, b, c):
    """The vector n with det(a, b, c, x) = <n, x> for all x."""
    rows = np.stack(np.broadcast_arrays(a, b, c), axis=-2)
    out = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        M = np.concatenate([rows, np.broadcast_to(e, rows.shape[:-2] + (1, 4))], axis=-2)
        out.append(np.linalg.det(M))
    return np.stack(out, axis=-1)


def _s3_normal(P, Pt, Ps):
    """Unit normal N in S^3 with (Psi_t, Psi_s, Psi, N) positively oriented."""
    n = _cross4(Pt, Ps, P)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def lawson_tau31() -> R4Immersion:
    """(cn(sqrt3 t) e^{i sqrt3 s}, sn(sqrt3 t) e^{i s / sqrt3}) with p = 2 sqrt2 / 3 (conformal, minimal in S^3)."""
    p = special.KLEIN_MODULUS
    K = special.complete_K(p)

    def fn(t, s):
        sn, cn, _ = taylor.jacobi(SQRT3 * t, p)
        a, b = SQRT3 * s, s / SQRT3
        return (cn * taylor.cos(a), cn * taylor.sin(a), sn * taylor.cos(b), sn * taylor.sin(b))

    dom = ParamDomain((0.0, 4.0 * K / SQRT3), (0.0, 2.0 * SQRT3 * math.pi), "torus", conformal=True)
    return R4Immersion("lawson-tau31", (Chart("main", dom, fn),), genus=1, description="Lawson torus tau_{3,1}")


make_lawson_tau31 = lawson_tau31


def clifford_torus() -> R4Immersion:
    r = 1.0 / math.sqrt(2.0)

    def fn(t, s):
        return (r * taylor.cos(t), r * taylor.sin(t), r * taylor.cos(s), r * taylor.sin(s))

    dom = ParamDomain((0.0, TWO_PI), (0.0, TWO_PI), "torus", conformal=True)
    return R4Immersion("clifford-torus", (Chart("main", dom, fn),), genus=1, description="Clifford torus")


def equatorial_sphere() -> R4Immersion:
    """The totally geodesic S^2 = S^3 cap {x4 = 0}, stereographic atlas."""

    def mk(chart):
        def fn(t, s):
            x = chart(t, s)
            return tuple(x) + (_zero_like(x[0]),)

        return fn

    charts = tuple(Chart(n, SPHERE_DISK, mk(f)) for n, f in SPHERE_CHARTS)
    return R4Immersion("equatorial-sphere", charts, genus=0, description="totally geodesic 2-sphere")


def _derivative(c, axis):
    return c.derivative(axis) if isinstance(c, taylor.Jet) else 0.0


PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def wedge_coordinates(p):
    """(Lambda^2_+, Lambda^2_-) coordinates of a bivector from its six Pluecker entries p_kl (k < l).

    Works on arrays and jets alike; for a unit simple bivector both triples are unit vectors.
    """
    p01, p02, p03, p12, p13, p23 = p
    plus = (p01 + p23, p02 - p13, p03 + p12)
    minus = (p01 - p23, p02 + p13, p03 - p12)
    return plus, minus


def gauss_map(psi: R4Immersion, name: str | None = None) -> SurfaceSpec:
    """Gauss map of an oriented immersion into R^4 as a surface of S^2_+ x S^2_-.

    The chart functions must be called with the seed jets of
    :func:`minlag.taylor.variables` (or plain arrays), which is how the analyzers call them.
    """

    def mk(psi_fn):
        def fn(t, s):
            if isinstance(t, taylor.Jet):
                order, base = t.order, (t.value, s.value)
            else:
                order, base = 0, np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
            comps = psi_fn(*taylor.variables(base[0], base[1], order + 1))
            a = [_derivative(c, 0) for c in comps]
            b = [_derivative(c, 1) for c in comps]
            p = [a[k] * b[l] - a[l] * b[k] for k, l in PAIRS]
            inv = taylor.power(sum(q * q for q in p), -0.5)
            plus, minus = wedge_coordinates(p)
            out = tuple(c * inv for c in plus + minus)
            if order == 0:
                out = tuple(c.value for c in out)
            return out

        return fn

    charts = tuple(Chart(c.name, c.domain, mk(c.fn)) for c in psi.charts)
    compact = all(c.domain.gluing in ("torus", "disk") for c in psi.charts)
    genus = psi.genus
    exp = Expectations(
        lagrangian=psi.in_S3,
        minimal=psi.in_S3 and psi.minimal,
        conformal=all(c.domain.conformal for c in psi.charts),
        orientable=True,
        compact=compact,
        genus=genus,
        betti1=2 * genus if genus is not None else None,
        degree=(1 - genus) if genus is not None else None,
    )
    return SurfaceSpec(name or f"gauss({psi.name})", charts, exp, f"Gauss map of the {psi.description}")


@dataclass(frozen=True)
class WedgeBasis:
    """The orthonormal basis E^i_+- of Lambda^2 R^4 built from an oriented orthonormal 4-frame."""

    frame: np.ndarray  # rows e1..e4

    def elements(self):
        e = np.asarray(self.frame, float)

        def w(i, j):
            return np.outer(e[i], e[j]) - np.outer(e[j], e[i])

        r = 1.0 / math.sqrt(2.0)
        return {
            "E1+": r * (w(0, 1) + w(2, 3)), "E2+": r * (w(0, 2) - w(1, 3)), "E3+": r * (w(0, 3) + w(1, 2)),
            "E1-": r * (w(0, 1) - w(2, 3)), "E2-": r * (w(0, 2) + w(1, 3)), "E3-": r * (w(0, 3) - w(1, 2)),
        }

    @staticmethod
    def inner(A, B):
        return 0.5 * float(np.sum(A * B))


def bivector_coordinates(u, v):
    """Standard-basis (Lambda^2_+, Lambda^2_-) coordinates of u ^ v, scaled by sqrt 2 as in the Gauss map."""
    p = [u[..., k] * v[..., l] - u[..., l] * v[..., k] for k, l in PAIRS]
    plus, minus = wedge_coordinates(p)
    return np.stack(plus, -1), np.stack(minus, -1)


def _s3_geometry(psi: R4Immersion, t, s, chart=0, order=2):
    D = psi.partials(t, s, order, chart)
    P, Pt, Ps = D[(0, 0)], D[(1, 0)], D[(0, 1)]
    N = _s3_normal(P, Pt, Ps)
    E, F, G = _dot(Pt, Pt), _dot(Pt, Ps), _dot(Ps, Ps)
    det = E * G - F**2
    if np.any(det <= 1e-14):
        raise DegeneracyError("R^4 immersion is degenerate at a sample")
    h = {k: _dot(D[k], N) for k in ((2, 0), (1, 1), (0, 2))}
    gi = (G / det, -F / det, E / det)
    # shape operator S = g^{-1} h
    S00 = gi[0] * h[(2, 0)] + gi[1] * h[(1, 1)]
    S01 = gi[0] * h[(1, 1)] + gi[1] * h[(0, 2)]
    S10 = gi[1] * h[(2, 0)] + gi[2] * h[(1, 1)]
    S11 = gi[1] * h[(1, 1)] + gi[2] * h[(0, 2)]
    sigma2 = S00**2 + S11**2 + 2 * S01 * S10
    H = 0.5 * (S00 + S11)
    return D, N, (E, F, G), sigma2, H


def s3_mean_curvature(psi: R4Immersion, q, chart: int = 0):
    """Mean curvature of an S^3-valued immersion (half the trace of the shape operator along N)."""
    _, _, _, _, H = _s3_geometry(psi, q[0], q[1], chart)
    return H


def gauss_map_relation_residual(psi: R4Immersion, q, chart: int = 0):
    """(r_metric, r_C): g = (2 + |sigma^|^2) g^ entrywise (relative) and C = K^ / (2 + |sigma^|^2)."""
    from .geometry import _frame, brioschi, _metric_partials

    t, s = q
    D, N, (E, F, G), sigma2, _ = _s3_geometry(psi, t, s, chart, order=3)
    Khat = brioschi(_metric_partials(D))
    gm = gauss_map(psi)
    fr = _frame(derivatives(gm, t, s, 1, "analytic", chart))
    factor = 2.0 + sigma2
    scale = factor * 0.5 * (E + G)
    r_metric = np.max(
        np.abs(np.stack([fr.E - factor * E, fr.F - factor * F, fr.G - factor * G])), axis=0
    ) / scale
    r_C = np.abs(fr.C - Khat / factor)
    return r_metric, r_C


def bipolar_residual(psi: R4Immersion, q, chart: int = 0):
    """max | coords(Psi ^ N) - (phi, -psi) | with phi, psi the Gauss map factors."""
    t, s = q
    D = psi.partials(t, s, 1, chart)
    N = _s3_normal(D[(0, 0)], D[(1, 0)], D[(0, 1)])
    plus, minus = bivector_coordinates(D[(0, 0)], N)
    X = gauss_map(psi).eval(t, s, chart)
    return np.maximum(
        np.max(np.abs(plus - X[..., :3]), axis=-1), np.max(np.abs(minus + X[..., 3:]), axis=-1)
    )


# ----------------------------------------------------------------------------
# the minimal Lagrangian Klein bottle
# ----------------------------------------------------------------------------


def _klein_fn(t, s):
    p = special.KLEIN_MODULUS
    sn, cn, dn = taylor.jacobi(SQRT3 * t, p)
    a = 2.0 * sn * cn
    sn2 = sn * sn
    inv = 1.0 / (3.0 * dn)
    c4, s4 = taylor.cos(4.0 * s / SQRT3), taylor.sin(4.0 * s / SQRT3)
    c2, s2 = taylor.cos(2.0 * s / SQRT3), taylor.sin(2.0 * s / SQRT3)
    A = 2.0 * sn2 - 3.0  # z = i A e^{4is/sqrt3}
    B = 4.0 * sn2 - 3.0  # w = -i B e^{-2is/sqrt3}
    return (
        -a * inv, -A * s4 * inv, A * c4 * inv,
        -2.0 * a * inv, -B * s2 * inv, -B * c2 * inv,
    )


def klein_domain() -> ParamDomain:
    K = special.complete_K(special.KLEIN_MODULUS)
    return ParamDomain(
        (0.0, 2.0 * K / SQRT3), (0.0, SQRT3 * math.pi / 2.0), "klein", conformal=True, glide_center=K / SQRT3
    )


def make_klein_bottle_B() -> SurfaceSpec:
    """Minimal Lagrangian Klein bottle, conformal chart on the fundamental domain of the deck group."""
    E = special.complete_E(special.KLEIN_MODULUS)
    exp = Expectations(
        lagrangian=True, minimal=True, conformal=True, orientable=False, euler=0, betti1=1,
        area=12.0 * math.pi * E, compact=True,
    )
    return SurfaceSpec("klein-b", (Chart("main", klein_domain(), _klein_fn),), exp, "minimal Lagrangian Klein bottle")


def klein_double_cover(surface: SurfaceSpec | None = None) -> SurfaceSpec:
    """The oriented double cover (a torus) of a klein-glued surface."""
    surface = surface or make_klein_bottle_B()
    ch = surface.charts[0]
    e = surface.expects
    exp = Expectations(
        lagrangian=e.lagrangian, minimal=e.minimal, conformal=e.conformal, orientable=True, genus=1,
        euler=0, betti1=2, degree=0, area=2 * e.area if e.area else None, compact=True,
    )
    return SurfaceSpec(surface.name + "-cover", (Chart(ch.name, ch.domain.double_cover(), ch.fn),), exp,
                       "oriented double cover")


def klein_conformal_factor(t):
    """e^{2u} = 6 dn^2 + 2 / (3 dn^2) at x = sqrt3 t."""
    dn = special.jacobi(SQRT3 * np.asarray(t, float), special.KLEIN_MODULUS)[2]
    return 6.0 * dn**2 + 2.0 / (3.0 * dn**2)


def klein_membership_residual(X) -> np.ndarray:
    """max(|2x - y|, |Re(sqrt(z) w) - Im(sqrt(z) w)|) for points (x, z; y, w) of S^2 x S^2.

    ``sqrt`` is the principal branch.
    """
    X = np.asarray(X, float)
    x, z = X[..., 0], X[..., 1] + 1j * X[..., 2]
    y, w = X[..., 3], X[..., 4] + 1j * X[..., 5]
    q = np.sqrt(z) * w
    return np.maximum(np.abs(2 * x - y), np.abs(q.real - q.imag))


def deck_residual(surface: SurfaceSpec, t, s) -> np.ndarray:
    """|Phi(glide(q)) - Phi(q)| (max norm) for a klein-glued surface."""
    dom = surface.domain
    gt, gs = dom.glide(t, s)
    return np.max(np.abs(surface.eval(gt, gs) - surface.eval(t, s)), axis=-1)


# ----------------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------------

FIXED = {
    "m0": make_M0,
    "torus-t": make_T,
    "graph-antipodal": lambda: make_graph(antipodal()),
    "graph-rotation": lambda: make_graph(rotated_antipodal(), "graph-rotation"),
    "graph-identity": lambda: make_graph(identity_map(), lagrangian=False),
    "clifford-gauss": lambda: gauss_map(clifford_torus(), "clifford-gauss"),
    "lawson-gauss": lambda: gauss_map(lawson_tau31(), "lawson-gauss"),
    "sphere-gauss": lambda: gauss_map(equatorial_sphere(), "sphere-gauss"),
    "klein-b": make_klein_bottle_B,
    "klein-b-cover": lambda: klein_double_cover(),
    "lawson-tau31": lawson_tau31,
    "clifford-torus": clifford_torus,
    "equatorial-sphere": equatorial_sphere,
}

# representative members of the parametrized families, used by sweeps over "the catalog"
FAMILY_DEFAULTS = (
    "torus-ab:0.5:0",
    "torus-ab:0.3:0.4",
    "product:lat=0.5:great",
    "product:wobble=0.3:lat=0.2",
    "const-c:0.1",
    "const-c:0.3",
    "const-c:0.45",
)


def get(name: str):
    """Resolve a catalog identifier to a SurfaceSpec (or R4Immersion for the R^4 entries)."""
    if name in FIXED:
        surf = FIXED[name]()
        return surf
    head, _, rest = name.partition(":")
    try:
        if head == "torus-ab":
            a, b = rest.split(":")
            return make_T_ab(float(a), float(b))
        if head == "const-c":
            return make_constant_C_graph(float(rest))
        if head == "product":
            c1, c2 = _split_curves(rest)
            return make_product_of_curves(parse_curve(c1), parse_curve(c2), name)
    except ValueError as exc:
        raise DomainError(f"bad surface identifier {name!r}: {exc}") from exc
    raise DomainError(f"unknown surface {name!r}")


def _split_curves(rest):
    parts = rest.split(":")
    if len(parts) != 2:
        raise DomainError("product needs two curve specs, e.g. product:lat=0.5:great")
    return parts


def names(include_r4: bool = True):
    out = [n for n in FIXED if include_r4 or not isinstance(FIXED[n](), R4Immersion)]
    return out + list(FAMILY_DEFAULTS)


def lagrangian_surfaces():
    """All S^2 x S^2 catalog entries that are declared Lagrangian."""
    out = []
    for n in names():
        s = get(n)
        if isinstance(s, SurfaceSpec) and s.expects.lagrangian:
            out.append(s)
    return out


__all__ = [
    "SpaceCurve", "R4Immersion", "WedgeBasis", "SphereMap", "make_M0", "make_T", "make_T_ab",
    "make_product_of_curves", "make_graph", "area_preserving_residual", "make_constant_C_graph",
    "gauss_map", "make_lawson_tau31", "lawson_tau31", "clifford_torus", "equatorial_sphere",
    "make_klein_bottle_B", "klein_double_cover", "gauss_map_relation_residual", "bipolar_residual",
    "klein_membership_residual", "deck_residual", "transform", "get", "names",
]
