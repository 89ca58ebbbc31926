"""
离散外微分测试 - 链复形、Poisson 求解、Green 函数、Hodge 分解与调和基
"""

import numpy as np
import pytest

from dec.harmonic import harmonic_basis
from dec.homology import homology_generators
from dec.operators import DEC
from errors import CompatibilityError, DECError
from surface.builders import double_torus


@pytest.fixture(scope="module")
def sphere_dec(sphere):
    return DEC(sphere)


@pytest.fixture(scope="module")
def small_dec(small_sphere):
    return DEC(small_sphere)


class TestOperators:

    def test_d1_d0_vanishes(self, sphere_dec, torus_ctx):
        for dec in (sphere_dec, torus_ctx.dec):
            assert abs(dec.d1 @ dec.d0).max() == 0.0

    def test_d0_of_constant(self, sphere_dec):
        np.testing.assert_allclose(sphere_dec.apply_d0(np.full(sphere_dec.geom.n_vertices, 3.0)), 0.0)

    def test_size_mismatch(self, sphere_dec):
        with pytest.raises(DECError):
            sphere_dec.apply_d1(np.zeros(3))

    def test_codifferential_is_adjoint(self, sphere_dec, rng):
        alpha = rng.normal(size=sphere_dec.geom.n_vertices)
        beta = rng.normal(size=sphere_dec.geom.n_edges)
        lhs = sphere_dec.inner1(sphere_dec.apply_d0(alpha), beta)
        rhs = sphere_dec.inner0(alpha, sphere_dec.delta1(beta))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

    def test_face_codifferential_is_adjoint(self, sphere_dec, rng):
        beta = rng.normal(size=sphere_dec.geom.n_edges)
        gamma = rng.normal(size=sphere_dec.geom.n_faces)
        lhs = sphere_dec.inner2(sphere_dec.apply_d1(beta), gamma)
        rhs = sphere_dec.inner1(beta, sphere_dec.delta2(gamma))
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


class TestPoisson:

    def test_zero_rhs(self, sphere_dec):
        u = sphere_dec.poisson_solve_0form(np.zeros(sphere_dec.geom.n_vertices))
        np.testing.assert_array_equal(u, 0.0)

    def test_manufactured_solution(self, sphere_dec, rng):
        alpha = rng.normal(size=sphere_dec.geom.n_vertices)
        u = sphere_dec.poisson_solve_0form(sphere_dec.stiffness @ alpha)
        np.testing.assert_allclose(u, alpha - sphere_dec.mean0(alpha), atol=1e-8)
        assert abs(sphere_dec.mean0(u)) < 1e-12

    def test_incompatible_rhs(self, sphere_dec):
        with pytest.raises(CompatibilityError):
            sphere_dec.poisson_solve_0form(np.ones(sphere_dec.geom.n_vertices))

    def test_green_function_symmetric(self, small_dec):
        g3 = small_dec.green_function(3)
        g40 = small_dec.green_function(40)
        assert abs(g3[40] - g40[3]) < 1e-9
        assert abs(small_dec.mean0(g3)) < 1e-12

    def test_green_function_matches_dense_oracle(self, small_dec):
        star0 = small_dec.star0
        volume = star0.sum()
        pinv = np.linalg.pinv(small_dec.stiffness.toarray())
        y = 17
        rhs = -star0 / volume
        rhs[y] += 1.0
        dense = pinv @ rhs
        dense -= np.dot(star0, dense) / volume
        np.testing.assert_allclose(small_dec.green_function(y), dense, atol=1e-9)

    def test_green_vertex_out_of_range(self, small_dec):
        with pytest.raises(DECError):
            small_dec.green_function(small_dec.geom.n_vertices)


class TestHodge:

    def test_sphere_decomposition_reconstructs(self, sphere_dec, rng):
        j = rng.normal(size=sphere_dec.geom.n_edges)
        parts = sphere_dec.hodge_decompose(j)
        np.testing.assert_allclose(parts.exact + parts.coexact + parts.xi, j, atol=1e-10)
        np.testing.assert_array_equal(parts.xi, 0.0)
        assert parts.residual < 1e-8

    def test_torus_decomposition_reconstructs(self, torus_ctx, rng):
        dec = torus_ctx.dec
        j = rng.normal(size=dec.geom.n_edges)
        parts = dec.hodge_decompose(j, torus_ctx.basis)
        np.testing.assert_allclose(parts.exact + parts.coexact + parts.xi, j, atol=1e-10)
        assert parts.residual < 1e-6
        assert abs(parts.beta.sum()) < 1e-8 * max(np.abs(parts.beta).sum(), 1.0)

    def test_exact_form_is_exact(self, torus_ctx, rng):
        dec = torus_ctx.dec
        alpha = rng.normal(size=dec.geom.n_vertices)
        parts = dec.hodge_decompose(dec.apply_d0(alpha), torus_ctx.basis)
        np.testing.assert_allclose(parts.exact, dec.apply_d0(alpha), atol=1e-8)


class TestHarmonic:

    def test_sphere_has_no_harmonic_forms(self, sphere_ctx):
        assert sphere_ctx.harmonic_dimension == 0
        assert len(sphere_ctx.loops) == 0

    def test_torus_dimension(self, torus_ctx):
        assert torus_ctx.harmonic_dimension == 2
        assert len(torus_ctx.loops) == 2

    def test_double_torus_dimension(self):
        dec = DEC(double_torus(cells=1))
        basis = harmonic_basis(dec)
        assert basis.dimension == 4

    def test_basis_is_orthonormal(self, torus_ctx):
        forms = torus_ctx.basis.forms
        gram = np.array([[torus_ctx.dec.inner1(a, b) for b in forms] for a in forms])
        np.testing.assert_allclose(gram, np.eye(2), atol=1e-10)

    def test_closed_and_coclosed(self, torus_ctx):
        dec = torus_ctx.dec
        for zeta in torus_ctx.basis.forms:
            assert np.linalg.norm(dec.d1 @ zeta) < 1e-8
            assert np.linalg.norm(dec.d0.T @ (dec.star1 * zeta)) < 1e-8

    def test_projection_kills_exact_forms(self, torus_ctx, rng):
        alpha = rng.normal(size=torus_ctx.geom.n_vertices)
        coefficients = torus_ctx.basis.coefficients(torus_ctx.dec.apply_d0(alpha))
        assert np.abs(coefficients).max() < 1e-6

    def test_projection_is_idempotent(self, torus_ctx, rng):
        j = rng.normal(size=torus_ctx.geom.n_edges)
        once = torus_ctx.basis.project(j)
        np.testing.assert_allclose(torus_ctx.basis.project(once), once, atol=1e-10)


class TestHomology:

    def test_loops_annihilate_exact_forms(self, torus_ctx, rng):
        alpha = rng.normal(size=torus_ctx.geom.n_vertices)
        periods = torus_ctx.loops.integrate(torus_ctx.dec.apply_d0(alpha))
        np.testing.assert_allclose(periods, 0.0, atol=1e-10)

    def test_period_matrix_invertible(self, torus_ctx):
        periods = np.array([torus_ctx.loops.integrate(zeta) for zeta in torus_ctx.basis.forms])
        assert np.linalg.matrix_rank(periods) == 2

    def test_loops_avoid_excluded_vertices(self, torus_mesh):
        # 参数网格上 2×2 的一小块
        excluded = np.array([0, 1, 16, 17])
        loops = homology_generators(torus_mesh, excluded=excluded)
        assert len(loops) == 2
        assert np.intersect1d(loops.vertices(), excluded).size == 0

    def test_sphere_has_no_loops(self, sphere):
        assert len(homology_generators(sphere)) == 0
