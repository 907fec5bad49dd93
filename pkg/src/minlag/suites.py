"""Verification suites: named residual checks with tolerances, grouped per surface."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import catalog, geometry, sinh_gordon, special, spectral
from .catalog import R4Immersion
from .errors import MinlagError
from .surface import SurfaceSpec

SUITES = ("lagrangian", "minimal", "identities", "gaussmap", "sinh-gordon", "spectral")

DEFAULT_TOLERANCES = {
    "lagrangian": 1e-9,
    "c_bound": 1e-9,
    "constant_C": 1e-8,
    "constant_K": 1e-6,
    "minimal": 1e-6,
    "sigma": 1e-7,
    "tg_C": 1e-8,
    "tg_K": 1e-6,
    "area_m0": 1e-3,
    "degree": 1e-6,
    "parallel_H": 1e-5,
    "H_spread": 1e-8,
    "H_value": 1e-8,
    "gauss_fd": 1e-4,
    "gauss_analytic": 1e-6,
    "cubic": 1e-9,
    "c_identities": 5e-4,
    "hopf": 1e-6,
    "gaussmap_relation": 1e-6,
    "bipolar": 1e-6,
    "s3_minimal": 1e-6,
    "clifford_in_T": 1e-10,
    "clifford_C": 1e-10,
    "max_C": 1e-6,
    "deck": 1e-10,
    "membership": 1e-10,
    "klein_area": 1e-4,
    "sg_lawson": 1e-6,
    "sg_ode": 1e-7,
    "sg_compat": 1e-4,
    "sg_drift": 1e-8,
    "flat_lambda": 4e-3,
    "refinement": 0.1,
    "klein_lambda": 0.02,
    "dense": 1e-8,
    "rayleigh": 0.01,
}

DEFAULT_GRIDS = {
    "nt": 64,
    "ns": 64,
    "area": 64,
    "sg_nodes": 512,
    "sg_step": 1e-3,
    "flat": 32,
    "spectral": 64,
    "dense": 16,
    "eig_tol": 1e-9,
}

# FD stencils reach 2h beyond a node; keep that much away from chart edges
FD_INSET = 4 * geometry.FD_STEP_SECOND


@dataclass
class Settings:
    tol_scale: float = 1.0
    tolerances: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    workers: int | None = None

    def tol(self, key: str) -> float:
        return self.tolerances.get(key, DEFAULT_TOLERANCES[key]) * self.tol_scale

    def grid(self, key: str):
        return self.grids.get(key, DEFAULT_GRIDS[key])


@dataclass(frozen=True)
class Check:
    """One verified quantity; ``passed`` is exactly ``max_residual <= tolerance``."""

    suite: str
    name: str
    surface: str
    max_residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def check(suite, name, surface, residual, tol, detail="") -> Check:
    r = float(residual)
    return Check(suite, name, surface, r, float(tol), bool(np.isfinite(r) and r <= tol), detail)


@dataclass(frozen=True)
class Task:
    suite: str
    surface: str
    run: Callable[[], list]

    def execute(self) -> list:
        try:
            return list(self.run())
        except MinlagError as exc:
            return [Check(self.suite, "error", self.surface, float("nan"), 0.0, False, f"{type(exc).__name__}: {exc}")]


# ----------------------------------------------------------------------------
# sampling helpers
# ----------------------------------------------------------------------------


def _samples(surface: SurfaceSpec, n, inset: float = 0.0):
    """(t, s, chart) midpoint samples of every chart; ``n`` is (nt, ns)."""
    out = []
    for k, ch in enumerate(surface.charts):
        dom = ch.domain
        T, S, _ = dom.grid(n[0], n[1], 0.0 if dom.compact else inset)
        out.append((T, S, k))
    return out


def _max_over(surface, n, fn, inset=0.0):
    return max(float(np.max(fn((T, S), k))) for T, S, k in _samples(surface, n, inset))


def _forms(surface, n, inset=0.0, scheme="analytic"):
    return [geometry.second_form(surface, (T, S), scheme, k) for T, S, k in _samples(surface, n, inset)]


def _field_range(forms, attr):
    vals = [np.asarray(getattr(f, attr) if attr != "H" else f.H_norm) for f in forms]
    return min(float(v.min()) for v in vals), max(float(v.max()) for v in vals)


def surface_kind(obj) -> str:
    return "r4" if isinstance(obj, R4Immersion) else "s2xs2"


# ----------------------------------------------------------------------------
# lagrangian: residual of omega, C bound, constant-C families
# ----------------------------------------------------------------------------


def _lagrangian_checks(surface: SurfaceSpec, st: Settings):
    n = (st.grid("nt"), st.grid("ns"))
    res = _max_over(surface, n, lambda q, k: geometry.lagrangian_residual(geometry.jet(surface, q, chart=k)))
    name = surface.name
    if not surface.expects.lagrangian:
        # negative control: a residual bounded away from zero is the expected outcome
        gate = geometry.LAGRANGIAN_GATE
        return [check("lagrangian", "negative-control", name, gate / max(res, 1e-300), 1.0,
                      f"max omega residual {res:.3e} must exceed {gate:g}")]
    out = [check("lagrangian", "omega-residual", name, res, st.tol("lagrangian"))]
    Cs = [geometry.associated_jacobian(geometry.jet(surface, (T, S), chart=k)) for T, S, k in _samples(surface, n)]
    c2 = max(float(np.max(C**2)) for C in Cs)
    out.append(check("lagrangian", "C-squared-bound", name, max(0.0, c2 - 0.25), st.tol("c_bound"), f"max C^2 = {c2:.17g}"))
    lam = surface.expects.constant_C
    if lam is not None:
        dev = max(float(np.max(np.abs(C - lam))) for C in Cs)
        out.append(check("lagrangian", "constant-C", name, dev, st.tol("constant_C"), f"expected C = {lam:g}"))
    return out


# ----------------------------------------------------------------------------
# minimal: mean curvature, curvature identities, model surfaces
# ----------------------------------------------------------------------------


def _minimal_checks(surface: SurfaceSpec, st: Settings):
    e = surface.expects
    name = surface.name
    if not e.lagrangian:
        return []
    n = (st.grid("nt"), st.grid("ns"))
    forms = _forms(surface, n)
    out = []
    H_lo, H_hi = _field_range(forms, "H")
    if e.minimal:
        out.append(check("minimal", "mean-curvature", name, H_hi, st.tol("minimal")))
    gauss_a = max(float(np.max(np.abs(f.K - 2 * f.C**2 - 2 * np.sum(f.H**2, -1) + 0.5 * f.sigma2))) for f in forms)
    out.append(check("minimal", "gauss-equation-analytic", name, gauss_a, st.tol("gauss_analytic")))
    gauss_fd = _max_over(surface, n, lambda q, k: geometry.gauss_equation_residual(surface, q, "fd", k), FD_INSET)
    out.append(check("minimal", "gauss-equation-fd", name, gauss_fd, st.tol("gauss_fd")))
    cub = max(float(np.max(f.cubic_symmetry_residual())) for f in forms)
    out.append(check("minimal", "cubic-form-symmetry", name, cub, st.tol("cubic")))
    if e.constant_K is not None:
        dev = max(float(np.max(np.abs(f.K - e.constant_K))) for f in forms)
        out.append(check("minimal", "constant-K", name, dev, st.tol("constant_K" if not e.totally_geodesic else "tg_K")))
    if e.totally_geodesic:
        sig = max(float(np.max(np.sqrt(f.sigma2))) for f in forms)
        out.append(check("minimal", "totally-geodesic", name, sig, st.tol("sigma")))
        if e.constant_C is not None:
            dev = max(float(np.max(np.abs(f.C - e.constant_C))) for f in forms)
            out.append(check("minimal", "C-value", name, dev, st.tol("tg_C")))
    if e.parallel_H:
        ph = _max_over(surface, n, lambda q, k: geometry.parallel_H_residual(surface, q, k), FD_INSET)
        out.append(check("minimal", "parallel-H", name, ph, st.tol("parallel_H")))
        out.append(check("minimal", "H-spread", name, H_hi - H_lo, st.tol("H_spread")))
    if e.area is not None:
        A = geometry.area(surface, st.grid("area"))
        if name == "m0":
            out.append(check("minimal", "area", name, abs(A - e.area), st.tol("area_m0"), f"area {A:.17g}"))
        else:
            out.append(check("minimal", "area-relative", name, abs(A - e.area) / e.area, st.tol("klein_area"),
                             f"area {A:.17g}"))
    if e.degree is not None and e.compact and all(c.domain.orientable for c in surface.charts):
        d = geometry.degree(surface, st.grid("area"))
        out.append(check("minimal", "degree", name, abs(d - e.degree), st.tol("degree"), f"degree {d:.17g}"))
    if surface.domain.gluing == "klein":
        T, S, _ = surface.domain.grid(*n)
        out.append(check("minimal", "deck-invariance", name, float(np.max(catalog.deck_residual(surface, T, S))),
                         st.tol("deck")))
        if name == "klein-b":
            X = surface.eval(T, S)
            out.append(check("minimal", "algebraic-membership", name,
                             float(np.max(catalog.klein_membership_residual(X))), st.tol("membership")))
    if name.startswith("torus-ab:"):
        _, a, b = name.split(":")
        target = catalog.T_ab_mean_curvature(float(a), float(b))
        out.append(check("minimal", "H-value", name, max(abs(H_hi - target), abs(H_lo - target)), st.tol("H_value"),
                         f"closed form |H| = {target:.17g}"))
    return out


# ----------------------------------------------------------------------------
# identities of minimal Lagrangian surfaces
# ----------------------------------------------------------------------------


def _identity_checks(surface: SurfaceSpec, st: Settings):
    e = surface.expects
    if not (e.minimal and e.lagrangian):
        return []
    n = (st.grid("nt"), st.grid("ns"))
    name = surface.name

    def cid(q, k):
        r1, r2 = geometry.c_identities_residual(surface, q, k)
        return np.maximum(r1, r2)

    out = [check("identities", "gradient-and-laplacian-of-C", name, _max_over(surface, n, cid, FD_INSET),
                 st.tol("c_identities"))]
    if surface.domain.conformal:
        def hopf(q, k):
            dz, mod = geometry.hopf_residual(surface, q, k)
            return np.maximum(dz, mod)

        out.append(check("identities", "hopf-holomorphic", name, _max_over(surface, n, hopf, FD_INSET), st.tol("hopf")))
    return out


# ----------------------------------------------------------------------------
# Gauss maps of surfaces in S^3
# ----------------------------------------------------------------------------


def _gaussmap_checks(psi: R4Immersion, st: Settings):
    n = (st.grid("nt"), st.grid("ns"))
    name = psi.name
    dom = psi.domain
    out = []
    samples = []
    for k, ch in enumerate(psi.charts):
        T, S, _ = ch.domain.grid(*n)
        samples.append((T, S, k))
    if psi.minimal:
        h = max(float(np.max(np.abs(catalog.s3_mean_curvature(psi, (T, S), k)))) for T, S, k in samples)
        out.append(check("gaussmap", "input-minimal-in-S3", name, h, st.tol("s3_minimal")))
    rel = max(float(np.max(np.maximum(*catalog.gauss_map_relation_residual(psi, (T, S), k)))) for T, S, k in samples)
    out.append(check("gaussmap", "metric-and-C-relation", name, rel, st.tol("gaussmap_relation")))
    bip = max(float(np.max(catalog.bipolar_residual(psi, (T, S), k))) for T, S, k in samples)
    out.append(check("gaussmap", "bipolar", name, bip, st.tol("bipolar")))
    gm = catalog.gauss_map(psi)
    if name == "clifford-torus":
        T, S, _ = samples[0]
        X = gm.eval(T, S)
        out.append(check("gaussmap", "lands-in-T", name, float(np.max(np.abs(X[..., [0, 3]]))), st.tol("clifford_in_T")))
        C = geometry.associated_jacobian(geometry.jet(gm, (T, S)))
        out.append(check("gaussmap", "C-vanishes", name, float(np.max(np.abs(C))), st.tol("clifford_C")))
    if name == "lawson-tau31":
        d = geometry.degree(gm, st.grid("area"))
        out.append(check("gaussmap", "degree", name, abs(d), st.tol("degree"), f"degree {d:.17g}"))
        # the node lattice contains t = 0, where |C| peaks
        T, S, _, _ = dom.nodes(*n)
        C = geometry.associated_jacobian(geometry.jet(gm, (T, S)))
        cmax = float(np.max(np.abs(C)))
        out.append(check("gaussmap", "max-abs-C", name, abs(cmax - 0.4), st.tol("max_C"), f"max |C| = {cmax:.17g}"))
        out.append(check("gaussmap", "C-squared-strict", name, max(0.0, float(np.max(C**2)) - 0.25 + 1e-3), 0.0,
                         "C^2 stays below 1/4 by at least 1e-3"))
    return out


# ----------------------------------------------------------------------------
# sinh-Gordon
# ----------------------------------------------------------------------------


def _sinh_gordon_checks(st: Settings):
    nodes = int(st.grid("sg_nodes"))
    f = sinh_gordon.lawson_field(nodes)
    out = [check("sinh-gordon", "lawson-solution", "sinh-gordon", sinh_gordon.sg_residual(f, analytic=True),
                 st.tol("sg_lawson"))]
    T = sinh_gordon.lawson_period()
    ode = sinh_gordon.integrate_reduced(math.atanh(0.5), 0.0, T, st.grid("sg_step"))
    exact = sinh_gordon.lawson_v(ode.t)
    out.append(check("sinh-gordon", "ode-reproduction", "sinh-gordon", float(np.max(np.abs(ode.v[:, 0] - exact))),
                     st.tol("sg_ode")))
    out.append(check("sinh-gordon", "first-integral-drift", "sinh-gordon", sinh_gordon.first_integral_drift(ode),
                     st.tol("sg_drift")))
    rec = sinh_gordon.reconstruct(f)
    out.append(check("sinh-gordon", "compatibility", "sinh-gordon", rec.compat_residual, st.tol("sg_compat")))
    return out


# ----------------------------------------------------------------------------
# spectral
# ----------------------------------------------------------------------------


def _flat_torus_checks(st: Settings):
    n = int(st.grid("flat"))
    tol = st.grid("eig_tol")
    lam = {}
    for m in (n // 2, n):
        r = spectral.lowest_eigenpairs(spectral.assemble(spectral.flat_torus_grid(m)), 6, tol)
        lam[m] = r.eigenvalues
    err = abs(lam[n][1] - 1.0)
    ratio = abs(lam[n // 2][1] - 1.0) / err
    out = [
        check("spectral", "flat-lambda1", "flat-torus", err, st.tol("flat_lambda"), f"lambda1 = {lam[n][1]:.17g}"),
        check("spectral", "flat-refinement-order", "flat-torus", abs(ratio - 4.0) / 4.0, st.tol("refinement"),
              f"error ratio {ratio:.6g}"),
        check("spectral", "flat-multiplicity-4", "flat-torus", float(np.ptp(lam[n][1:5])), st.tol("dense")),
    ]
    nd = int(st.grid("dense"))
    p = spectral.assemble(spectral.flat_torus_grid(nd))
    it = spectral.lowest_eigenpairs(p, 10, tol).eigenvalues
    dense = spectral.dense_eigenvalues(p)[:10]
    out.append(check("spectral", "dense-cross-check", "flat-torus", float(np.max(np.abs(it - dense))), st.tol("dense")))
    return out


def _index_checks(surface: SurfaceSpec, st: Settings):
    name = surface.name
    n = int(st.grid("spectral"))
    tol = st.grid("eig_tol")
    r = spectral.index_report(surface, n, n, tol=tol)
    counts = f"ind0={r.ind0} ind1={r.ind1} betti1={r.betti1} index={r.index}"
    out = [check("spectral", "ind0-zero", name, float(r.ind0), 0.0, counts)]
    if surface.domain.gluing == "torus":
        g = surface.expects.genus or 1
        out.append(check("spectral", "orientable-index", name, abs(r.index - 2 * g), 0.0, counts))
        return out
    plus = [v for v, p in zip(r.eigenvalues, r.parity) if p == "+"]
    out.append(check("spectral", "lambda1", name, abs(plus[1] - 1.0), st.tol("klein_lambda"), f"lambda1 = {plus[1]:.17g}"))
    out.append(check("spectral", "ind1-at-least-2", name, max(0.0, 2.0 - r.ind1), 0.0, counts))
    out.append(check("spectral", "index-at-least-3", name, max(0.0, 3.0 - r.index), 0.0, counts))
    grid = spectral.conformal_grid(surface, n, n)
    for label, f in zip(("f", "g"), spectral.klein_test_functions(grid)):
        q = spectral.rayleigh(grid, f)
        out.append(check("spectral", f"rayleigh-{label}", name, q - 1.0 / 3.0, st.tol("rayleigh"), f"quotient {q:.17g}"))
    nd = int(st.grid("dense"))
    small = spectral.conformal_grid(surface, nd, nd)
    worst = 0.0
    for sector in ("+", "-"):
        p = spectral.assemble(small, sector)
        it = spectral.lowest_eigenpairs(p, 10, tol).eigenvalues
        worst = max(worst, float(np.max(np.abs(it - spectral.dense_eigenvalues(p)[:10]))))
    out.append(check("spectral", "dense-cross-check", name, worst, st.tol("dense")))
    return out


# ----------------------------------------------------------------------------
# task assembly
# ----------------------------------------------------------------------------


DEFAULT_IDENTITY_SURFACES = ("klein-b", "lawson-gauss", "m0", "torus-t", "sphere-gauss", "clifford-gauss")
DEFAULT_GAUSSMAP_INPUTS = ("clifford-torus", "lawson-tau31", "equatorial-sphere")
DEFAULT_SPECTRAL_SURFACES = ("torus-t", "klein-b")


def _s2xs2_names():
    return [n for n in catalog.names() if not isinstance(catalog.get(n), R4Immersion)]


def build_tasks(suites, surfaces, st: Settings) -> list:
    """Tasks for the selected suites; ``surfaces`` (names) restricts or extends the defaults."""
    tasks = []
    for suite in suites:
        if suite == "sinh-gordon":
            if surfaces is None:
                tasks.append(Task(suite, "sinh-gordon", lambda: _sinh_gordon_checks(st)))
            continue
        if suite == "gaussmap":
            pool = surfaces if surfaces is not None else DEFAULT_GAUSSMAP_INPUTS
            for name in pool:
                obj = catalog.get(name)
                if isinstance(obj, R4Immersion):
                    tasks.append(Task(suite, name, lambda o=obj: _gaussmap_checks(o, st)))
            continue
        if suite == "spectral":
            if surfaces is None:
                tasks.append(Task(suite, "flat-torus", lambda: _flat_torus_checks(st)))
            pool = surfaces if surfaces is not None else DEFAULT_SPECTRAL_SURFACES
            for name in pool:
                obj = catalog.get(name)
                if isinstance(obj, SurfaceSpec) and obj.expects.compact and obj.expects.minimal:
                    tasks.append(Task(suite, name, lambda o=obj: _index_checks(o, st)))
            continue
        if suite == "identities":
            pool = surfaces if surfaces is not None else DEFAULT_IDENTITY_SURFACES
        else:
            pool = surfaces if surfaces is not None else _s2xs2_names()
        fn = {"lagrangian": _lagrangian_checks, "minimal": _minimal_checks, "identities": _identity_checks}[suite]
        for name in pool:
            obj = catalog.get(name)
            if isinstance(obj, SurfaceSpec):
                tasks.append(Task(suite, name, lambda o=obj, f=fn: f(o, st)))
    return tasks


def run_tasks(tasks, workers: int | None = None) -> list:
    """Execute tasks (in a thread pool when workers > 1); results keep task order."""
    if workers == 1 or len(tasks) <= 1:
        groups = [t.execute() for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(Task.execute, tasks))
    return [c for g in groups for c in g]


def run(suites=SUITES, surfaces=None, settings: Settings | None = None) -> list:
    st = settings or Settings()
    return run_tasks(build_tasks(suites, surfaces, st), st.workers)


# quantities reported alongside the checks of a single surface


def summaries(surface, st: Settings) -> dict:
    if isinstance(surface, R4Immersion):
        return {}
    n = (st.grid("nt"), st.grid("ns"))
    e = surface.expects
    out = {"area": geometry.area(surface, st.grid("area"))}
    if not e.lagrangian:
        return out
    forms = _forms(surface, n)
    out["C_min"], out["C_max"] = _field_range(forms, "C")
    out["K_min"], out["K_max"] = _field_range(forms, "K")
    out["H_max"] = _field_range(forms, "H")[1]
    if e.compact and all(c.domain.orientable for c in surface.charts):
        out["degree"] = geometry.degree(surface, st.grid("area"))
    else:
        out["degree"] = None
    return out


def klein_area_target() -> float:
    return 12.0 * math.pi * special.complete_E(special.KLEIN_MODULUS)
