"""
切向量场测试 - 复结构、联络、电流、涡度与能量
"""

import numpy as np
import pytest

from errors import FieldError
from fields.connection import levi_civita
from fields.energy import (dirichlet_energy, energy, extrinsic_energy, rough_laplacian_apply,
                           surface_gradient_energy)
from fields.tangent import (TangentField, complex_rotate, current_j, pointwise_inner, shape_apply2,
                            vorticity)
from surface.base import SurfaceGeometry


def random_unit_field(geom, rng):
    return TangentField(np.exp(2j * np.pi * rng.random(geom.n_vertices)))


def random_field(geom, rng):
    return TangentField(rng.normal(size=geom.n_vertices) + 1j * rng.normal(size=geom.n_vertices))


class TestTangentField:

    def test_rejects_non_finite(self):
        with pytest.raises(FieldError):
            TangentField(np.array([1.0, np.nan]))

    def test_complex_structure_squares_to_minus_one(self, sphere, rng):
        u = random_field(sphere, rng)
        np.testing.assert_allclose(complex_rotate(complex_rotate(u)).values, -u.values)

    def test_rotation_is_orthogonal(self, sphere, rng):
        u = random_field(sphere, rng)
        np.testing.assert_allclose(pointwise_inner(complex_rotate(u), u), 0.0, atol=1e-12)

    def test_ambient_roundtrip_is_tangent(self, torus_mesh, rng):
        u = random_field(torus_mesh, rng)
        ambient = u.to_ambient(torus_mesh)
        np.testing.assert_allclose(np.einsum('ij,ij->i', ambient, torus_mesh.vertex_normals), 0.0, atol=1e-12)
        np.testing.assert_allclose(TangentField.from_ambient(torus_mesh, ambient).values, u.values, atol=1e-12)

    def test_sphere_shape_square_is_scalar(self, sphere, rng):
        u = random_field(sphere, rng)
        np.testing.assert_allclose(shape_apply2(sphere, u).values, u.values, atol=1e-10)


class TestConnection:

    def test_sphere_total_holonomy(self, sphere_ctx):
        assert abs(sphere_ctx.conn.total_holonomy() - 4.0 * np.pi) < 1e-8

    def test_torus_total_holonomy(self, torus_ctx):
        assert abs(torus_ctx.conn.total_holonomy()) < 1e-8

    def test_face_holonomy_matches_curvature(self, sphere_ctx):
        # 单位球面上每个面的和乐 ≈ 面积
        geom = sphere_ctx.geom
        np.testing.assert_allclose(sphere_ctx.conn.holonomy, geom.face_areas, rtol=0.05)


class TestCurrent:

    def test_gauge_shift(self, sphere_ctx, rng):
        conn = sphere_ctx.conn
        u = random_unit_field(sphere_ctx.geom, rng)
        alpha = 0.05 * rng.normal(size=sphere_ctx.geom.n_vertices)
        j, _ = current_j(u, conn)
        shifted, _ = current_j(u.rotate(alpha), conn)
        difference = shifted - j - sphere_ctx.dec.apply_d0(alpha)
        np.testing.assert_allclose(np.angle(np.exp(1j * difference)), 0.0, atol=1e-10)

    def test_invariant_under_complex_structure(self, sphere_ctx, rng):
        u = random_unit_field(sphere_ctx.geom, rng)
        j, _ = current_j(u, sphere_ctx.conn)
        rotated, _ = current_j(complex_rotate(u), sphere_ctx.conn)
        np.testing.assert_allclose(rotated, j, atol=1e-12)

    def test_zero_field_is_flagged(self, sphere_ctx):
        u = TangentField(np.zeros(sphere_ctx.geom.n_vertices))
        j, flagged = current_j(u, sphere_ctx.conn)
        assert flagged.all()
        np.testing.assert_array_equal(j, 0.0)

    def test_total_vorticity_is_euler_class(self, sphere_ctx, rng):
        omega = vorticity(random_field(sphere_ctx.geom, rng), sphere_ctx.conn)
        assert abs(omega.sum() - 4.0 * np.pi) < 1e-8

    def test_length_mismatch(self, sphere_ctx):
        with pytest.raises(FieldError):
            current_j(TangentField(np.ones(3)), sphere_ctx.conn)


class TestEnergy:

    def test_zero_field_is_pure_potential(self, sphere_ctx):
        geom = sphere_ctx.geom
        eps = 0.1
        parts = energy(geom, sphere_ctx.conn, TangentField(np.zeros(geom.n_vertices)), eps)
        assert parts.dirichlet == 0.0
        assert parts.extrinsic == 0.0
        assert abs(parts.potential - geom.total_area / (4.0 * eps ** 2)) < 1e-10 * parts.potential

    def test_sphere_extrinsic_energy(self, rng):
        from surface.builders import icosphere
        geom = icosphere(refine=2, radius=2.0)
        u = random_unit_field(geom, rng)
        assert abs(extrinsic_energy(geom, u) - geom.total_area / 8.0) < 1e-10

    def test_intrinsic_model_drops_extrinsic_term(self, sphere_ctx, rng):
        u = random_unit_field(sphere_ctx.geom, rng)
        parts = energy(sphere_ctx.geom, sphere_ctx.conn, u, 0.1, model='intrinsic')
        assert parts.extrinsic == 0.0
        assert parts.total == parts.intrinsic

    def test_non_positive_epsilon(self, sphere_ctx, rng):
        with pytest.raises(FieldError):
            energy(sphere_ctx.geom, sphere_ctx.conn, random_field(sphere_ctx.geom, rng), 0.0)

    def test_laplacian_is_self_adjoint(self, sphere_ctx, rng):
        geom, conn = sphere_ctx.geom, sphere_ctx.conn
        u, v = random_field(geom, rng), random_field(geom, rng)
        lhs = np.dot(geom.vertex_areas, pointwise_inner(rough_laplacian_apply(conn, u), v))
        rhs = np.dot(geom.vertex_areas, pointwise_inner(u, rough_laplacian_apply(conn, v)))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_laplacian_matches_dirichlet_energy(self, sphere_ctx, rng):
        geom, conn = sphere_ctx.geom, sphere_ctx.conn
        u = random_field(geom, rng)
        pairing = np.dot(geom.vertex_areas, pointwise_inner(rough_laplacian_apply(conn, u), u))
        assert abs(-pairing - 2.0 * dirichlet_energy(conn, u)) <= 1e-10 * abs(pairing)

    def test_orthogonal_energy_split(self, sphere_ctx):
        # ½|∇_s u|² = ½|Du|² + ½|𝒮u|²，u 为 z 轴在切平面上的投影
        geom, conn = sphere_ctx.geom, sphere_ctx.conn
        ez = np.broadcast_to(np.array([0.0, 0.0, 1.0]), geom.vertices.shape)
        u = TangentField.from_ambient(geom, ez)
        total = surface_gradient_energy(geom, u, sphere_ctx.dec.stiffness)
        split = dirichlet_energy(conn, u) + extrinsic_energy(geom, u)
        assert abs(total - split) / total < 0.1

    def test_orientation_reversal_keeps_energy(self, ellipsoid_ctx, rng):
        geom = ellipsoid_ctx.geom
        reversed_geom = SurfaceGeometry(geom.vertices, geom.faces[:, ::-1], analytic=geom.analytic,
                                        orient_outward=False)
        assert reversed_geom.inward
        u = random_unit_field(geom, rng)
        u_reversed = TangentField.from_ambient(reversed_geom, u.to_ambient(geom))
        forward = energy(geom, ellipsoid_ctx.conn, u, 0.1)
        backward = energy(reversed_geom, levi_civita(reversed_geom), u_reversed, 0.1)
        assert abs(backward.extrinsic - forward.extrinsic) <= 1e-10 * forward.extrinsic
        assert abs(backward.total - forward.total) <= 1e-10 * forward.total
