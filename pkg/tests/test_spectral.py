import math

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from _oracles import flat_grid_eigenvalue, numpy_dense_spectrum
from hypothesis import given
from hypothesis import strategies as st

from minlag import catalog, spectral
from minlag.errors import AmbiguityError, ConvergenceError, DomainError, PreconditionError

B = catalog.make_klein_bottle_B()


def _sparse(problem):
    return scipy.sparse.csr_matrix(problem.stencil.dense())


def test_constants_are_harmonic():
    for p in (spectral.assemble(spectral.flat_torus_grid(10, 6)),
              spectral.assemble(spectral.conformal_grid(B, 12, 8), "+")):
        one = np.ones(p.size)
        assert np.max(np.abs(p.apply_L(one))) <= 1e-12
    grid = spectral.conformal_grid(catalog.make_T(), 8, 8)
    assert spectral.rayleigh(grid, np.ones(grid.size)) == pytest.approx(0.0, abs=1e-14)


def test_stiffness_is_symmetric_positive_semidefinite():
    for p in (spectral.assemble(spectral.conformal_grid(B, 8, 6), s) for s in ("+", "-")):
        K = p.stencil.dense()
        np.testing.assert_allclose(K, K.T, atol=1e-13)
        assert np.linalg.eigvalsh(K).min() >= -1e-12


@pytest.mark.parametrize("n", [8, 16, 32])
def test_flat_torus_matches_discrete_closed_form(n):
    r = spectral.lowest_eigenpairs(spectral.assemble(spectral.flat_torus_grid(n)), 9, 1e-10)
    modes = sorted(flat_grid_eigenvalue(n, k, l) for k in range(n) for l in range(n))[:9]
    np.testing.assert_allclose(r.eigenvalues, modes, atol=1e-9)


def test_flat_torus_scaling_with_side_length():
    r = spectral.lowest_eigenpairs(spectral.assemble(spectral.flat_torus_grid(16, length_t=4 * math.pi)), 2, 1e-10)
    assert r.eigenvalues[1] == pytest.approx(flat_grid_eigenvalue(16, 1, 0, 4 * math.pi), abs=1e-10)


@pytest.mark.parametrize("sector", ["+", "-"])
def test_iterative_solver_matches_scipy_generalized_dense(sector):
    p = spectral.assemble(spectral.conformal_grid(B, 16, 12), sector)
    ref = scipy.linalg.eigh(p.stencil.dense(), np.diag(p.mass), eigvals_only=True)[:8]
    got = spectral.lowest_eigenpairs(p, 8, 1e-10).eigenvalues
    np.testing.assert_allclose(got, ref, atol=1e-8)
    np.testing.assert_allclose(spectral.dense_eigenvalues(p)[:8], numpy_dense_spectrum(p.stencil.dense(), p.mass)[:8],
                               atol=1e-10)


def test_iterative_solver_matches_scipy_eigsh_on_larger_grid():
    p = spectral.assemble(spectral.conformal_grid(B, 48, 48), "-")
    M = scipy.sparse.diags(p.mass)
    ref = np.sort(scipy.sparse.linalg.eigsh(_sparse(p), k=6, M=M, sigma=-0.5, which="LM",
                                            return_eigenvectors=False))
    got = spectral.lowest_eigenpairs(p, 6, 1e-10).eigenvalues
    np.testing.assert_allclose(got, ref, atol=1e-8)


def test_eigenvectors_satisfy_the_pencil():
    p = spectral.assemble(spectral.conformal_grid(B, 24, 24), "+")
    r = spectral.lowest_eigenpairs(p, 5, 1e-10)
    for lam, f in zip(r.eigenvalues, r.eigenvectors.T):
        res = np.linalg.norm(p.apply_L(f) + lam * p.mass * f) / np.linalg.norm(p.mass * f)
        assert res <= 1e-9
    assert np.max(r.residuals) <= 1e-10


def test_solver_is_deterministic():
    p = spectral.assemble(spectral.conformal_grid(B, 16, 16), "-")
    a = spectral.lowest_eigenpairs(p, 5, 1e-9).eigenvalues
    b = spectral.lowest_eigenpairs(p, 5, 1e-9).eigenvalues
    assert np.array_equal(a, b)


def test_solver_reports_non_convergence():
    p = spectral.assemble(spectral.flat_torus_grid(32))
    with pytest.raises(ConvergenceError) as info:
        spectral.lowest_eigenpairs(p, 6, 1e-14, max_blocks=1)
    assert "residuals" in info.value.diagnostics


def test_parity_split_dimensions_and_projection():
    grid = spectral.conformal_grid(B, 8, 6)
    split = spectral.parity_split(grid)
    assert split.plus.size + split.minus.size == split.cover.size
    Kc = split.cover.stencil.dense()
    for sign, sector in ((1.0, split.plus), (-1.0, split.minus)):
        Bm = split.basis(sign)
        np.testing.assert_allclose(Bm.T @ Bm, np.eye(grid.size), atol=1e-14)
        np.testing.assert_allclose(Bm.T @ Kc @ Bm, sector.stencil.dense(), atol=1e-12)
        np.testing.assert_allclose(Bm.T @ (split.cover.mass[:, None] * Bm), np.diag(sector.mass), atol=1e-14)


def test_sector_spectra_partition_the_cover_spectrum():
    grid = spectral.conformal_grid(B, 8, 6)
    split = spectral.parity_split(grid)
    both = np.sort(np.concatenate([spectral.dense_eigenvalues(split.plus), spectral.dense_eigenvalues(split.minus)]))
    np.testing.assert_allclose(both, spectral.dense_eigenvalues(split.cover), atol=1e-10)


def test_klein_test_functions_are_odd():
    grid = spectral.conformal_grid(B, 16, 16)
    perm = spectral.parity_split(grid).permutation
    for f in spectral.klein_test_functions(grid):
        v = f.ravel()
        np.testing.assert_allclose(v[perm], -v, rtol=0, atol=1e-14)


@pytest.mark.parametrize("offset", [(0.0, 0.37), (0.5, 0.0), (0.5, 1.1)])
def test_spectrum_invariant_under_grid_translation(offset):
    base = spectral.conformal_grid(B, 32, 32)
    moved = spectral.conformal_grid(B, 32, 32, (offset[0] * base.dt, offset[1] * base.ds))
    for sector in ("+", "-"):
        a = spectral.lowest_eigenpairs(spectral.assemble(base, sector), 6, 1e-9).eigenvalues
        b = spectral.lowest_eigenpairs(spectral.assemble(moved, sector), 6, 1e-9).eigenvalues
        assert np.max(np.abs(a[1:] - b[1:]) / a[1:] if sector == "+" else np.abs(a - b) / a) <= 5e-3


def test_grid_preconditions():
    with pytest.raises(PreconditionError):
        spectral.conformal_grid(B, 15, 16)
    with pytest.raises(PreconditionError):
        spectral.ConformalGrid(np.ones((6, 5)), 1.0, 1.0, "klein")
    with pytest.raises(PreconditionError):
        spectral.conformal_grid(catalog.make_M0(), 8, 8)
    with pytest.raises(PreconditionError):
        spectral.conformal_grid(catalog.get("const-c:0.3"), 8, 8)
    with pytest.raises(PreconditionError):
        spectral.conformal_grid(catalog.get("product:wobble=0.3:lat=0.2"), 8, 8)
    with pytest.raises(PreconditionError):
        spectral.conformal_grid(B, 16, 16, (0.3 * B.domain.t_length / 16, 0.0))
    with pytest.raises(DomainError):
        spectral.ConformalGrid(-np.ones((4, 4)), 1.0, 1.0)
    with pytest.raises(PreconditionError):
        spectral.assemble(spectral.flat_torus_grid(4), "+")
    with pytest.raises(PreconditionError):
        spectral.assemble(spectral.conformal_grid(B, 8, 8))
    with pytest.raises(PreconditionError):
        spectral.parity_split(spectral.flat_torus_grid(4))
    with pytest.raises(DomainError):
        spectral.dense_eigenvalues(spectral.assemble(spectral.flat_torus_grid(66)))
    with pytest.raises(DomainError):
        spectral.rayleigh(spectral.flat_torus_grid(4), np.zeros(16))


def test_ambiguous_eigenvalue_raises():
    with pytest.raises(AmbiguityError):
        spectral._count_below_one(np.array([0.0, 0.97]), 0.02, include_zero=False)
    assert spectral._count_below_one(np.array([0.0, 0.5, 0.99, 1.2]), 0.02, include_zero=False) == 1
    assert spectral._count_below_one(np.array([0.0, 0.5, 0.99, 1.2]), 0.02, include_zero=True) == 2


def test_index_reports():
    rt = spectral.index_report(catalog.make_T(), 32)
    assert (rt.ind0, rt.index, rt.betti1) == (0, 2, 2)
    rb = spectral.index_report(B, 32)
    assert rb.ind0 == 0 and rb.ind1 >= 2 and rb.index >= 3 and rb.betti1 == 1
    assert set(rb.parity) == {"+", "-"}
    assert list(rb.eigenvalues) == sorted(rb.eigenvalues)
    with pytest.raises(PreconditionError):
        spectral.index_report(catalog.make_T_ab(0.3, 0.4), 16)


def test_klein_first_eigenvalue_and_rayleigh_quotients():
    grid = spectral.conformal_grid(B, 64, 64)
    r = spectral.lowest_eigenpairs(spectral.assemble(grid, "+"), 3, 1e-9)
    assert r.eigenvalues[0] == pytest.approx(0.0, abs=1e-9)
    assert r.eigenvalues[1] == pytest.approx(1.0, abs=0.02)
    for f in spectral.klein_test_functions(grid):
        assert spectral.rayleigh(grid, f) <= 1 / 3 + 0.01


def test_spectral_report_dict():
    rep = spectral.spectral_report(catalog.make_T(), 16)
    assert rep["surface"] == "torus-t" and rep["index"] == 2 and rep["grid"] == [16, 16]
    assert all(isinstance(x, float) for x in rep["eigenvalues"])


@given(st.integers(2, 9), st.integers(2, 9))
def test_flat_solve_inverts_shifted_stiffness(nt, ns):
    p = spectral.assemble(spectral.flat_torus_grid(nt, ns))
    x = np.random.default_rng(nt * 10 + ns).standard_normal(p.size)
    y = p.flat_solve(p.apply_K(x) + 0.7 * x, 0.7)
    np.testing.assert_allclose(y, x, atol=1e-10)


@given(st.integers(1, 4), st.integers(1, 4))
def test_sector_flat_solve_inverts_sector_stiffness(ht, hs):
    grid = spectral.ConformalGrid(np.ones((2 * ht, 2 * hs)), 0.3, 0.5, "klein", shift_t=ht)
    for sector in ("+", "-"):
        p = spectral.assemble(grid, sector)
        x = np.random.default_rng(ht + 7 * hs).standard_normal(p.size)
        np.testing.assert_allclose(p.flat_solve(p.apply_K(x) + 1.3 * x, 1.3), x, atol=1e-10)
