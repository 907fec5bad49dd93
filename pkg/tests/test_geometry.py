import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minlag import catalog, geometry, special
from minlag.errors import DomainError, PreconditionError
from minlag.geometry import ProductPoint, ProductTangent, ambient_J, symplectic_form
from minlag.surface import transform

vec3 = st.lists(st.floats(-1, 1), min_size=3, max_size=3).map(np.array).filter(lambda v: np.linalg.norm(v) > 0.2)


def _unit(v):
    return v / np.linalg.norm(v)


def _tangent(p, a):
    return a - np.dot(a, p) * p


@st.composite
def point_and_vectors(draw):
    x, y = _unit(draw(vec3)), _unit(draw(vec3))
    p = ProductPoint(x, y)
    vs = [ProductTangent(_tangent(x, draw(vec3)), _tangent(y, draw(vec3))) for _ in range(2)]
    return p, vs[0], vs[1]


def test_ambient_J_example():
    p = ProductPoint((1, 0, 0), (0, 0, 1))
    Jv = ambient_J(p, ProductTangent((0, 1, 0), (1, 0, 0)))
    np.testing.assert_allclose(Jv.as6(), [0, 0, 1, 0, 1, 0], atol=1e-15)


def test_symplectic_form_example():
    p = ProductPoint((1, 0, 0), (1, 0, 0))
    v = ProductTangent((0, 1, 0), (0, 0, 0))
    w = ProductTangent((0, 0, 1), (0, 0, 0))
    assert symplectic_form(p, v, w) == pytest.approx(1.0, abs=1e-15)


@given(point_and_vectors())
def test_J_squares_to_minus_identity_and_is_isometric(data):
    p, v, _ = data
    JJv = ambient_J(p, ambient_J(p, v))
    np.testing.assert_allclose(JJv.as6(), -v.as6(), atol=1e-12)
    assert np.linalg.norm(ambient_J(p, v).as6()) == pytest.approx(np.linalg.norm(v.as6()), abs=1e-12)


@given(point_and_vectors())
def test_symplectic_form_is_antisymmetric_and_compatible(data):
    p, v, w = data
    assert symplectic_form(p, v, w) == pytest.approx(-symplectic_form(p, w, v), abs=1e-12)
    assert symplectic_form(p, v, v) == pytest.approx(0.0, abs=1e-12)
    assert symplectic_form(p, v, w) == pytest.approx(np.dot(ambient_J(p, v).as6(), w.as6()), abs=1e-12)


def test_non_tangent_vector_rejected():
    p = ProductPoint((1, 0, 0), (0, 0, 1))
    with pytest.raises(PreconditionError):
        ambient_J(p, ProductTangent((1, 0, 0), (1, 0, 0)))
    with pytest.raises(PreconditionError):
        symplectic_form(p, ProductTangent((0, 1, 0), (0, 0, 0)), ProductTangent((0, 0, 0), (0, 0, 1)))
    with pytest.raises(DomainError):
        ProductPoint((1, 1, 0), (0, 0, 1))


# ---------------------------------------------------------------------------
# jets of catalog surfaces
# ---------------------------------------------------------------------------

M0 = catalog.make_M0()
T = catalog.make_T()
B = catalog.make_klein_bottle_B()
SQRT3 = math.sqrt(3.0)


def _random_points(dom, n, seed, inset=0.05):
    rng = np.random.default_rng(seed)
    if dom.gluing == "disk":
        r = np.sqrt(rng.uniform(0, 1, n)) * (dom.radius - inset)
        a = rng.uniform(0, 2 * np.pi, n)
        return r * np.cos(a), r * np.sin(a)
    pad = 0.0 if dom.compact else dom.margin + inset
    return (rng.uniform(dom.t_range[0] + pad, dom.t_range[1] - pad, n),
            rng.uniform(dom.s_range[0] + pad, dom.s_range[1] - pad, n))


def test_M0_second_factor_moves_opposite():
    t, s = _random_points(M0.domain, 10, 0)
    j = geometry.jet(M0, (t, s))
    np.testing.assert_allclose(j.d_t[..., 3:], -j.d_t[..., :3], atol=1e-15)
    np.testing.assert_allclose(j.d_s[..., 3:], -j.d_s[..., :3], atol=1e-15)


def test_B_base_point():
    X = B.eval(0.0, 0.0)
    np.testing.assert_allclose(X[:3], (0, 0, -1), atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(X[3:]), 1.0, atol=1e-15)


@pytest.mark.parametrize("name", ["m0", "torus-t", "klein-b", "const-c:0.3", "lawson-gauss", "torus-ab:0.3:0.4"])
def test_analytic_partials_agree_with_finite_differences(name):
    surf = catalog.get(name)
    t, s = _random_points(surf.domain, 12, 1, inset=0.1)
    a = geometry.derivatives(surf, t, s, 1)
    f = geometry.derivatives(surf, t, s, 1, ("fd", 1e-4))
    for key in ((1, 0), (0, 1)):
        assert np.max(np.abs(a[key] - f[key])) <= 1e-7


def test_T_metric_is_euclidean():
    t, s = _random_points(T.domain, 20, 2)
    E, F, G = geometry.first_form(geometry.jet(T, (t, s)))
    np.testing.assert_allclose(np.stack([E, F, G]), np.stack([np.ones(20), np.zeros(20), np.ones(20)]), atol=1e-14)


def test_B_metric_is_conformal_with_closed_form_factor():
    t, s = _random_points(B.domain, 25, 3)
    E, F, G = geometry.first_form(geometry.jet(B, (t, s)))
    dn = special.jacobi(SQRT3 * t, special.KLEIN_MODULUS).dn
    want = 6 * dn**2 + 2 / (3 * dn**2)
    np.testing.assert_allclose(E, want, rtol=1e-12)
    np.testing.assert_allclose(G, want, rtol=1e-12)
    np.testing.assert_allclose(F, 0.0, atol=1e-12)


@pytest.mark.parametrize("name", ["m0", "torus-t", "klein-b", "const-c:0.1", "graph-rotation",
                                  "product:wobble=0.3:lat=0.2", "clifford-gauss"])
def test_rank_identity_on_lagrangian_surfaces(name):
    surf = catalog.get(name)
    for k, ch in enumerate(surf.charts):
        t, s = _random_points(ch.domain, 15, 4 + k)
        assert np.max(geometry.rank_identity_residual(geometry.jet(surf, (t, s), chart=k))) <= 1e-8


def test_M0_factor_frames_have_half_length():
    t, s = _random_points(M0.domain, 15, 5)
    j = geometry.jet(M0, (t, s))
    fr = geometry._frame_of_jet(j)
    for e in (fr.e1, fr.e2):
        np.testing.assert_allclose(np.sum(e[..., :3] ** 2, -1), 0.5, atol=1e-13)


@pytest.mark.parametrize("name", ["klein-b", "m0", "const-c:0.3", "lawson-gauss"])
def test_C_independent_of_frame_rotation(name):
    surf = catalog.get(name)
    t, s = _random_points(surf.domain, 10, 6)
    j = geometry.jet(surf, (t, s))
    base = geometry.associated_jacobian(j)
    for angle in (0.3, 1.9, -2.4):
        assert np.max(np.abs(geometry.associated_jacobian(j, angle) - base)) <= 1e-12


def _rotation(seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


@pytest.mark.parametrize("name", ["klein-b", "const-c:0.3", "torus-ab:0.3:0.4"])
def test_invariants_equivariant_under_product_isometries(name):
    surf = catalog.get(name)
    moved = transform(surf, _rotation(1), _rotation(2))
    t, s = _random_points(surf.domain, 10, 7, inset=0.1)
    a = geometry.second_form(surf, (t, s))
    b = geometry.second_form(moved, (t, s))
    for field in ("C", "K", "sigma2", "H_norm"):
        assert np.max(np.abs(getattr(a, field) - getattr(b, field))) <= 1e-10


def test_hopf_theta_values():
    t, s = _random_points(T.domain, 10, 8)
    np.testing.assert_allclose(np.abs(geometry.hopf_theta(geometry.derivatives(T, t, s, 1))), 0.25, atol=1e-14)
    t, s = _random_points(M0.domain, 10, 9)
    np.testing.assert_allclose(np.abs(geometry.hopf_theta(geometry.derivatives(M0, t, s, 1))), 0.0, atol=1e-14)


@pytest.mark.parametrize("name", ["klein-b", "lawson-gauss"])
def test_hopf_residuals_small(name):
    surf = catalog.get(name)
    t, s = _random_points(surf.domain, 10, 10)
    dzbar, mod = geometry.hopf_residual(surf, (t, s))
    assert np.max(dzbar) <= 1e-6 and np.max(mod) <= 1e-6


def test_degree_requires_orientable_compact_domain():
    with pytest.raises(PreconditionError):
        geometry.degree(B, 16)
    with pytest.raises(PreconditionError):
        geometry.degree(catalog.get("const-c:0.3"), 16)


def test_degree_and_area_of_m0_and_torus():
    assert geometry.degree(M0, 32) == pytest.approx(1.0, abs=1e-6)
    assert geometry.area(M0, 32) == pytest.approx(8 * math.pi, rel=1e-6)
    assert geometry.degree(T, 16) == pytest.approx(0.0, abs=1e-12)
    assert geometry.area(T, 16) == pytest.approx(4 * math.pi**2, rel=1e-12)


def test_parallel_H_fails_on_non_examples():
    for name in ("product:wobble=0.3:lat=0.2", "const-c:0.3"):
        surf = catalog.get(name)
        t, s = _random_points(surf.domain, 30, 11, inset=0.1)
        assert np.max(geometry.parallel_H_residual(surf, (t, s))) > 1e-2


def test_parallel_H_holds_on_latitude_products():
    surf = catalog.make_T_ab(0.3, 0.4)
    t, s = _random_points(surf.domain, 10, 12)
    assert np.max(geometry.parallel_H_residual(surf, (t, s))) <= 1e-5


def test_B_curvature_matches_gauss_equation_at_random_points():
    t, s = _random_points(B.domain, 20, 13)
    ff = geometry.second_form(B, (t, s))
    gauss = 2 * ff.C**2 + 2 * np.sum(ff.H**2, -1) - 0.5 * ff.sigma2
    assert np.max(np.abs(ff.K - gauss)) <= 1e-8
    assert np.max(ff.H_norm) <= 1e-9


def test_B_curvature_by_finite_differences():
    t, s = _random_points(B.domain, 20, 14)
    Ka = geometry.gauss_curvature(B, (t, s))
    Kc = geometry.gauss_curvature(B, (t, s), "fd", method="conformal")
    Kb = geometry.gauss_curvature(B, (t, s), "fd", method="brioschi")
    assert np.max(np.abs(Ka - Kc)) <= 1e-4
    assert np.max(np.abs(Ka - Kb)) <= 1e-4


def test_conformal_curvature_rejected_on_non_conformal_chart():
    surf = catalog.get("const-c:0.3")
    with pytest.raises(PreconditionError):
        geometry.gauss_curvature(surf, (1.0, 0.0), "fd", method="conformal")


def test_constant_C_graph_invariants():
    surf = catalog.get("const-c:0.3")
    t, s = _random_points(surf.domain, 20, 15)
    ff = geometry.second_form(surf, (t, s))
    np.testing.assert_allclose(ff.C, 0.3, atol=1e-10)
    assert np.min(ff.H_norm) > 1e-3
    assert np.max(ff.cubic_symmetry_residual()) <= 1e-9


def test_c_identities_on_B():
    t, s = _random_points(B.domain, 10, 16)
    r1, r2 = geometry.c_identities_residual(B, (t, s))
    assert max(np.max(r1), np.max(r2)) <= 5e-4


def test_c_identities_need_minimal_surface():
    with pytest.raises(PreconditionError):
        geometry.c_identities_residual(catalog.get("const-c:0.3"), (1.0, 0.0))


def test_non_lagrangian_surface_rejected_by_C():
    surf = catalog.get("graph-identity")
    t, s = _random_points(surf.domain, 5, 17)
    j = geometry.jet(surf, (t, s))
    assert np.max(geometry.lagrangian_residual(j)) > 0.1
    with pytest.raises(PreconditionError):
        geometry.associated_jacobian(j)


def test_plane_chart_rejects_points_outside():
    surf = catalog.get("const-c:0.3")
    with pytest.raises(DomainError):
        geometry.jet(surf, (0.0, 0.999))
