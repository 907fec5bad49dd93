"""Laplace-Beltrami spectra of conformal metrics on tori and Klein bottles.

For a conformal metric e^{2u}(dt^2 + ds^2) the Laplacian is e^{-2u} times the
flat one, so the discrete problem is ``K f = lambda M f`` with K the flat
five-point stiffness matrix (identical for every conformal factor) and M the
diagonal of nodal weights e^{2u} dt ds.  ``L = -K`` is the discrete Laplacian.

Klein bottles are handled on the node lattice of the fundamental domain.  Its
double cover carries the deck involution tau; functions split into tau-even
(the Klein bottle's own functions) and tau-odd sectors, each assembled as a
stencil on the fundamental-domain nodes where wrapping through the glide
picks up the sector sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import AmbiguityError, ConvergenceError, DomainError, PreconditionError
from .surface import SurfaceSpec

#: seed of the start block of the eigensolver
SOLVER_SEED = 20240611
SPECTRAL_MARGIN = 0.02
ZERO_TOL = 1e-6
SHIFT = 1.0


# ----------------------------------------------------------------------------
# grids and operators
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ConformalGrid:
    """Node lattice ``(t0 + i dt, s0 + j ds)`` with conformal weights e^{2u}.

    For ``gluing == "klein"`` the lattice covers the fundamental domain and
    ``shift_t`` is the index map i -> (shift_t - i) mod nt of the glide.
    """

    weight: np.ndarray
    dt: float
    ds: float
    gluing: str = "torus"
    t0: float = 0.0
    s0: float = 0.0
    shift_t: int = 0

    def __post_init__(self):
        w = np.asarray(self.weight, float)
        object.__setattr__(self, "weight", w)
        if self.gluing not in ("torus", "klein"):
            raise DomainError(f"unsupported gluing {self.gluing!r}")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise DomainError("conformal weights must be positive")
        if self.gluing == "klein" and (self.nt % 2 or self.ns % 2):
            raise PreconditionError("klein grids need even node counts on both axes")

    @property
    def nt(self):
        return self.weight.shape[0]

    @property
    def ns(self):
        return self.weight.shape[1]

    @property
    def size(self):
        return self.weight.size

    def mass(self):
        return (self.weight * self.dt * self.ds).ravel()

    def cover(self) -> "ConformalGrid":
        """Double-cover torus grid of a klein grid (weights repeat under the glide)."""
        if self.gluing != "klein":
            return self
        w = np.concatenate([self.weight, self.weight[self.glide_index()]], axis=1)
        return ConformalGrid(w, self.dt, self.ds, "torus", self.t0, self.s0)

    def glide_index(self):
        return (self.shift_t - np.arange(self.nt)) % self.nt


def flat_torus_grid(nt: int, ns: int | None = None, length_t: float = 2 * math.pi, length_s: float | None = None):
    ns = nt if ns is None else ns
    length_s = length_t if length_s is None else length_s
    return ConformalGrid(np.ones((nt, ns)), length_t / nt, length_s / ns)


def conformal_grid(surface: SurfaceSpec, nt: int, ns: int, offset=(0.0, 0.0)) -> ConformalGrid:
    """Sample e^{2u} = g11 on the node lattice of a conformal torus or klein chart."""
    from .geometry import _frame, derivatives

    if len(surface.charts) != 1:
        raise PreconditionError("spectral grids need a single-chart torus or klein surface")
    dom = surface.domain
    if dom.gluing not in ("torus", "klein"):
        raise PreconditionError(f"{surface.name}: spectral grids need torus or klein gluing")
    if not dom.conformal:
        raise PreconditionError(f"{surface.name}: chart is not declared conformal")
    T, S, dt, ds = dom.nodes(nt, ns, offset)
    fr = _frame(derivatives(surface, T, S, 1, "analytic"))
    if np.max(np.abs(fr.E - fr.G) + np.abs(fr.F)) > 1e-8 * np.max(fr.E):
        raise PreconditionError(f"{surface.name}: chart fails the conformality check")
    shift = 0
    if dom.gluing == "klein":
        if nt % 2 or ns % 2:
            raise PreconditionError("klein grids need even node counts")
        k = (dom.glide_center - 2 * T[0, 0]) / dt
        shift = int(round(k))
        if abs(k - shift) > 1e-9:
            raise PreconditionError("glide does not map nodes to nodes; offset t by a multiple of dt/2")
    return ConformalGrid(fr.E, dt, ds, dom.gluing, T[0, 0], S[0, 0], shift)


@dataclass
class Stencil:
    """Sparse symmetric K as diagonal plus four signed neighbour couplings per node."""

    diag: np.ndarray
    nbr: np.ndarray
    coef: np.ndarray

    def apply(self, x):
        return _backend.stencil_apply(self.diag, self.nbr, self.coef, np.ascontiguousarray(x, dtype=float))

    def dense(self):
        n = self.diag.size
        A = np.diag(self.diag.astype(float))
        for k in range(self.nbr.shape[1]):
            np.add.at(A, (np.arange(n), self.nbr[:, k]), self.coef[:, k])
        return A


def _torus_stencil(nt, ns, dt, ds):
    a, b = ds / dt, dt / ds
    I, J = np.meshgrid(np.arange(nt), np.arange(ns), indexing="ij")
    idx = lambda i, j: (i % nt) * ns + (j % ns)  # noqa: E731
    nbr = np.stack([idx(I + 1, J), idx(I - 1, J), idx(I, J + 1), idx(I, J - 1)], -1).reshape(-1, 4)
    coef = np.tile(np.array([-a, -a, -b, -b]), (nt * ns, 1))
    diag = np.full(nt * ns, 2 * (a + b))
    return Stencil(diag, nbr.astype(np.int64), coef)


def _klein_stencil(g: ConformalGrid, sign: float):
    """Stencil on fundamental-domain nodes; couplings through the glide carry ``sign``."""
    nt, ns = g.nt, g.ns
    a, b = g.ds / g.dt, g.dt / g.ds
    I, J = np.meshgrid(np.arange(nt), np.arange(ns), indexing="ij")
    gi = g.glide_index()[I]
    up_i = np.where(J + 1 == ns, gi, I)
    up_j = np.where(J + 1 == ns, 0, J + 1)
    dn_i = np.where(J == 0, gi, I)
    dn_j = np.where(J == 0, ns - 1, J - 1)
    idx = lambda i, j: i * ns + j  # noqa: E731
    nbr = np.stack([idx((I + 1) % nt, J), idx((I - 1) % nt, J), idx(up_i, up_j), idx(dn_i, dn_j)], -1)
    coef = np.stack([
        np.full(I.shape, -a), np.full(I.shape, -a),
        np.where(J + 1 == ns, sign, 1.0) * -b, np.where(J == 0, sign, 1.0) * -b,
    ], -1)
    diag = np.full(nt * ns, 2 * (a + b))
    return Stencil(diag, nbr.reshape(-1, 4).astype(np.int64), coef.reshape(-1, 4))


@dataclass
class SpectralProblem:
    """``K f = lambda M f`` on one function space, with an exact flat-torus preconditioner."""

    stencil: Stencil
    mass: np.ndarray
    grid: ConformalGrid
    sector: str  # "torus", "+" or "-"
    _fft_shape: tuple = field(default=(), repr=False)

    @property
    def size(self):
        return self.mass.size

    def apply_K(self, x):
        return self.stencil.apply(x)

    def apply_L(self, x):
        return -self.stencil.apply(x)

    # -- flat preconditioner ----------------------------------------------
    def _symbol(self, nt, ns):
        g = self.grid
        a, b = g.ds / g.dt, g.dt / g.ds
        kt = 2 - 2 * np.cos(2 * np.pi * np.arange(nt) / nt)
        ks = 2 - 2 * np.cos(2 * np.pi * np.arange(ns) / ns)
        return a * kt[:, None] + b * ks[None, :]

    def flat_solve(self, rhs, shift):
        """Exact solve of (K + shift I) x = rhs (columns of rhs are independent)."""
        g = self.grid
        cols = rhs.ndim == 2
        R = rhs if cols else rhs[:, None]
        m = R.shape[1]
        if self.sector == "torus":
            F = R.reshape(g.nt, g.ns, m)
            X = self._fft_solve(F, shift)
            out = X.reshape(-1, m)
        else:
            sign = 1.0 if self.sector == "+" else -1.0
            F = R.reshape(g.nt, g.ns, m) / math.sqrt(2.0)
            full = np.concatenate([F, sign * F[g.glide_index()]], axis=1)
            X = self._fft_solve(full, shift)
            out = ((X[:, : g.ns] + sign * X[g.glide_index(), g.ns :]) / math.sqrt(2.0)).reshape(-1, m)
        return out if cols else out[:, 0]

    def _fft_solve(self, F, shift):
        nt, ns = F.shape[:2]
        sym = self._symbol(nt, ns) + shift
        Fh = np.fft.fft2(F, axes=(0, 1))
        return np.real(np.fft.ifft2(Fh / sym[:, :, None], axes=(0, 1)))


def assemble(grid: ConformalGrid, sector: str | None = None) -> SpectralProblem:
    """Stiffness stencil and mass for a torus grid, or one parity sector of a klein grid.

    For klein grids ``sector`` is "+" (functions on the Klein bottle) or "-".
    """
    if grid.gluing == "torus":
        if sector not in (None, "torus"):
            raise PreconditionError("parity sectors need a klein grid")
        return SpectralProblem(_torus_stencil(grid.nt, grid.ns, grid.dt, grid.ds), grid.mass(), grid, "torus")
    if sector not in ("+", "-"):
        raise PreconditionError("klein grids need sector '+' or '-'")
    return SpectralProblem(_klein_stencil(grid, 1.0 if sector == "+" else -1.0), grid.mass(), grid, sector)


def operator_pair(grid: ConformalGrid, sector: str | None = None):
    """(L, M) as dense-free callables: L f = -K f and the mass diagonal."""
    p = assemble(grid, sector)
    return p.apply_L, p.mass


@dataclass(frozen=True)
class ParitySplit:
    plus: SpectralProblem
    minus: SpectralProblem
    cover: SpectralProblem
    permutation: np.ndarray  # tau on flattened double-cover indices

    def basis(self, sign: float) -> np.ndarray:
        """Orthonormal basis (e_r + sign e_{tau r}) / sqrt2 of a sector, as columns."""
        g = self.plus.grid
        n = g.size
        B = np.zeros((2 * n, n))
        reps = np.arange(n)
        i, j = np.divmod(reps, g.ns)
        full_rep = i * (2 * g.ns) + j
        B[full_rep, reps] = 1 / math.sqrt(2)
        B[self.permutation[full_rep], reps] = sign / math.sqrt(2)
        return B


def parity_split(grid: ConformalGrid) -> ParitySplit:
    """Even and odd sectors of the deck involution on the double cover of a klein grid."""
    if grid.gluing != "klein":
        raise PreconditionError("parity split needs a klein grid")
    cover = grid.cover()
    nt, NS = cover.nt, cover.ns
    I, J = np.meshgrid(np.arange(nt), np.arange(NS), indexing="ij")
    perm = (grid.glide_index()[I] * NS + (J + grid.ns) % NS).ravel()
    if not np.array_equal(perm[perm], np.arange(perm.size)):
        raise PreconditionError("glide is not an involution on the node lattice")
    return ParitySplit(assemble(grid, "+"), assemble(grid, "-"), assemble(cover), perm)


# ----------------------------------------------------------------------------
# eigensolver
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    parity: tuple
    residuals: np.ndarray | None = None
    ind0: int | None = None
    ind1: int | None = None
    betti1: int | None = None
    index: int | None = None
    margins: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "parities": list(self.parity),
            "ind0": self.ind0,
            "ind1": self.ind1,
            "betti1": self.betti1,
            "index": self.index,
            "margins": self.margins,
        }


def _pcg(problem: SpectralProblem, rhs, shift, tol=1e-13, maxiter=500):
    """Solve (K + shift M) X = rhs column-wise, preconditioned by the flat solve with mean mass."""
    mbar = float(np.mean(problem.mass))
    m = problem.mass[:, None]

    def A(x):
        return problem.apply_K(x) + shift * m * x

    def P(r):
        return problem.flat_solve(r, shift * mbar)

    X = np.zeros_like(rhs)
    R = rhs.copy()
    Z = P(R)
    D = Z.copy()
    rz = np.sum(R * Z, axis=0)
    norm0 = np.linalg.norm(rhs, axis=0)
    norm0[norm0 == 0] = 1.0
    for it in range(maxiter):
        AD = A(D)
        alpha = rz / np.sum(D * AD, axis=0)
        X += alpha * D
        R -= alpha * AD
        if np.all(np.linalg.norm(R, axis=0) <= tol * norm0):
            return X
        Z = P(R)
        rz_new = np.sum(R * Z, axis=0)
        D = Z + (rz_new / rz) * D
        rz = rz_new
    raise ConvergenceError("inner CG solve did not converge", {"iterations": maxiter})


def lowest_eigenpairs(problem: SpectralProblem, k: int, tol: float = 1e-8, block: int | None = None,
                      max_blocks: int = 60) -> SpectralResult:
    """The k smallest eigenpairs of K f = lambda M f.

    Block Krylov iteration with full reorthogonalization on the transformed
    operator M^{1/2} (K + M)^{-1} M^{1/2} (whose top end is the bottom of the
    spectrum), Rayleigh-Ritz on the original pencil, fixed-seed start block.
    Stops when every wanted pair satisfies ||L f + lambda M f|| <= tol ||M f||.
    """
    n = problem.size
    if k < 1:
        raise DomainError("k must be at least 1")
    k = min(k, n)
    b = min(n, block or max(k + 4, 8))
    sq = np.sqrt(problem.mass)[:, None]

    def op(Y):
        return sq * _pcg(problem, sq * Y, SHIFT)

    def A(Y):
        return problem.apply_K(Y / sq) / sq

    rng = np.random.default_rng(SOLVER_SEED)
    Q, _ = np.linalg.qr(rng.standard_normal((n, b)))
    V = Q
    last = None
    for it in range(max_blocks):
        AV = A(V)
        T = V.T @ AV
        T = 0.5 * (T + T.T)
        w, Z = np.linalg.eigh(T)
        X = V @ Z[:, :k]
        R = AV @ Z[:, :k] - X * w[:k]
        # ||L f + lam M f|| / ||M f|| with f = M^{-1/2} x
        res = np.linalg.norm(sq * R, axis=0) / np.linalg.norm(sq * X, axis=0)
        last = (w[:k], X, res)
        if np.all(res <= tol) and V.shape[1] >= k:
            break
        if V.shape[1] >= n:
            break
        W = op(Q)
        for _ in range(2):
            W -= V @ (V.T @ W)
        Qn, Rn = np.linalg.qr(W)
        weak = np.abs(np.diag(Rn)) < 1e-10 * max(1.0, np.abs(Rn).max())
        if np.any(weak):
            fresh = rng.standard_normal((n, int(weak.sum())))
            for _ in range(2):
                fresh -= V @ (V.T @ fresh)
            Qn[:, weak] = fresh
            Qn, _ = np.linalg.qr(Qn)
            for _ in range(2):
                Qn -= V @ (V.T @ Qn)
            Qn, _ = np.linalg.qr(Qn)
        take = min(b, n - V.shape[1])
        Q = Qn[:, :take]
        V = np.hstack([V, Q])
    else:
        w, X, res = last
        raise ConvergenceError(
            "eigensolver did not converge", {"residuals": res.tolist(), "eigenvalues": w.tolist()}
        )
    w, X, res = last
    if not np.all(res <= tol):
        raise ConvergenceError("eigensolver did not converge", {"residuals": res.tolist(), "eigenvalues": w.tolist()})
    F = X / sq
    label = {"torus": "n/a", "+": "+", "-": "-"}[problem.sector]
    return SpectralResult(w, F, (label,) * len(w), res)


def dense_eigenvalues(problem: SpectralProblem) -> np.ndarray:
    """All eigenvalues by a dense symmetric solve (small grids only)."""
    if problem.size > 4096:
        raise DomainError("dense solve limited to 4096 unknowns")
    sq = np.sqrt(problem.mass)
    A = problem.stencil.dense() / np.outer(sq, sq)
    return np.linalg.eigvalsh(0.5 * (A + A.T))


# ----------------------------------------------------------------------------
# index and stability
# ----------------------------------------------------------------------------


def _count_below_one(values, margin, include_zero: bool):
    lo, hi = 1 - 2 * margin, 1 - margin
    band = [float(x) for x in values if lo <= x < hi]
    if band:
        raise AmbiguityError(f"eigenvalue(s) {band} inside ({lo:g}, {hi:g}); refine the grid")
    floor = -np.inf if include_zero else ZERO_TOL
    return int(np.sum((values > floor) & (values < hi)))


def _enough(problem, margin, k0=8, tol=1e-8):
    """Eigenpairs up to the first one at or above 1, so every eigenvalue below 1 is counted."""
    k = k0
    while True:
        r = lowest_eigenpairs(problem, k, tol)
        if r.eigenvalues[-1] >= 1 - margin + 0.5 * margin or k >= problem.size:
            top = r.eigenvalues[-1]
            if top > 1.0 + margin or k >= problem.size:
                return r
        k *= 2


def index_report(surface: SurfaceSpec, nt: int = 64, ns: int | None = None, margin: float = SPECTRAL_MARGIN,
                 tol: float = 1e-8) -> SpectralResult:
    """Ind0, Ind1, beta1 and the Morse index from scalar spectra.

    Orientable: Ind = 2g + 2 Ind0.  Klein bottle: Ind = beta1 + Ind0 + Ind1
    with Ind1 counted in the tau-odd sector of the double cover.
    """
    ns = nt if ns is None else ns
    e = surface.expects
    if not (e.minimal and e.lagrangian and e.compact):
        raise PreconditionError(f"{surface.name}: index needs a compact minimal Lagrangian surface")
    grid = conformal_grid(surface, nt, ns)
    margins = {"epsilon": margin, "band": [1 - 2 * margin, 1 - margin]}
    if grid.gluing == "torus":
        r = _enough(assemble(grid), margin, tol=tol)
        ind0 = _count_below_one(r.eigenvalues, margin, include_zero=False)
        g = e.genus if e.genus is not None else 1
        betti1 = e.betti1 if e.betti1 is not None else 2 * g
        return SpectralResult(r.eigenvalues, r.eigenvectors, r.parity, r.residuals, ind0, 0, betti1,
                              2 * g + 2 * ind0, margins)
    split = parity_split(grid)
    rp = _enough(split.plus, margin, tol=tol)
    rm = _enough(split.minus, margin, tol=tol)
    ind0 = _count_below_one(rp.eigenvalues, margin, include_zero=False)
    ind1 = _count_below_one(rm.eigenvalues, margin, include_zero=True)
    betti1 = e.betti1 if e.betti1 is not None else 1
    vals = np.concatenate([rp.eigenvalues, rm.eigenvalues])
    order = np.argsort(vals, kind="stable")
    parity = tuple(np.array(rp.parity + rm.parity)[order])
    return SpectralResult(vals[order], None, parity, None, ind0, ind1, betti1, betti1 + ind0 + ind1, margins)


def rayleigh(grid: ConformalGrid, f) -> float:
    """Discrete Dirichlet energy over the weighted L2 norm, (f^T K f) / (f^T M f).

    The flat energy suffices because Dirichlet energy is conformally invariant.
    """
    f = np.asarray(f, float).ravel()
    p = assemble(grid if grid.gluing == "torus" else grid.cover())
    den = float(f @ (p.mass * f))
    if den == 0.0:
        raise DomainError("Rayleigh quotient of the zero function")
    return float(f @ p.apply_K(f)) / den


def klein_test_functions(grid: ConformalGrid):
    """cos(2s/sqrt3) and sin(2s/sqrt3) on the double-cover lattice of a klein grid (both tau-odd)."""
    cover = grid.cover()
    s = cover.s0 + cover.ds * np.arange(cover.ns)
    S = np.broadcast_to(s, (cover.nt, cover.ns))
    return np.cos(2 * S / math.sqrt(3)), np.sin(2 * S / math.sqrt(3))


def spectral_report(surface: SurfaceSpec, nt: int = 64, ns: int | None = None,
                    margin: float = SPECTRAL_MARGIN) -> dict:
    """JSON-ready summary: surface, grid, eigenvalues, parities, counts and margins."""
    ns = nt if ns is None else ns
    r = index_report(surface, nt, ns, margin)
    out = {"surface": surface.name, "grid": [nt, ns]}
    out.update(r.as_dict())
    return out
