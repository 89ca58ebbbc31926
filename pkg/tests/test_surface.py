"""
曲面几何测试 - 拓扑、度量、曲率、测地工具与网格读写
"""

import numpy as np
import pytest

from errors import GeometryError, StepTooLargeError
from surface.base import SurfaceGeometry, SurfacePoint
from surface.builders import double_torus, icosphere, load_or_build
from surface.geodesic import exp_map, geodesic_distance, log_map, min_separation
from surface.mesh_io import read_mesh, write_obj, write_off


class TestTopology:

    def test_icosphere_counts(self, sphere):
        assert sphere.n_vertices == 642
        assert sphere.euler_characteristic() == 2
        assert sphere.genus() == 0

    def test_torus_genus(self, torus_mesh):
        assert torus_mesh.euler_characteristic() == 0
        assert torus_mesh.genus() == 1

    def test_double_torus_genus(self):
        geom = double_torus(cells=1)
        assert geom.euler_characteristic() == -2
        assert geom.genus() == 2

    def test_open_boundary_rejected(self, small_sphere):
        with pytest.raises(GeometryError, match="open boundary"):
            SurfaceGeometry(small_sphere.vertices, small_sphere.faces[1:])

    def test_inconsistent_orientation_rejected(self, small_sphere):
        faces = small_sphere.faces.copy()
        faces[0] = faces[0, ::-1]
        with pytest.raises(GeometryError, match="inconsistent orientation"):
            SurfaceGeometry(small_sphere.vertices, faces)

    def test_inward_faces_are_flipped(self, small_sphere):
        flipped = SurfaceGeometry(small_sphere.vertices, small_sphere.faces[:, ::-1])
        assert flipped.signed_volume > 0
        np.testing.assert_allclose(flipped.total_area, small_sphere.total_area)

    def test_unknown_descriptor(self):
        with pytest.raises(GeometryError):
            load_or_build({'kind': 'klein_bottle'})


class TestMetric:

    @pytest.mark.parametrize("name", ["sphere", "torus_mesh", "ellipsoid_mesh"])
    def test_gauss_bonnet(self, name, request):
        geom = request.getfixturevalue(name)
        chi = geom.euler_characteristic()
        assert abs(geom.total_curvature() - 2.0 * np.pi * chi) < 1e-9

    def test_sphere_area_converges(self, sphere):
        assert abs(sphere.total_area - 4.0 * np.pi) / (4.0 * np.pi) < 0.02

    def test_sphere_shape_operator_is_umbilic(self):
        geom = icosphere(refine=2, radius=2.0)
        squares = np.einsum('kij,kjl->kil', geom.shape_ops, geom.shape_ops)
        np.testing.assert_allclose(squares, np.broadcast_to(0.25 * np.eye(2), squares.shape), atol=1e-10)

    def test_vertex_curvature_averages_to_one(self, sphere):
        kappa = sphere.gauss_curvature()
        assert abs(np.average(kappa, weights=sphere.vertex_areas) - 1.0) < 0.03
        np.testing.assert_allclose(sphere.analytic.gauss_curvature(sphere.vertices), 1.0)

    def test_vertices_lie_on_analytic_surface(self, sphere, ellipsoid_mesh):
        for geom in (sphere, ellipsoid_mesh):
            np.testing.assert_allclose(geom.analytic.implicit(geom.vertices), 0.0, atol=1e-10)

    def test_shape_operator_inside_face(self, sphere):
        point = sphere.make_point(np.array([1.0, 2.0, 3.0]))
        s = sphere.shape_operator_at(point)
        np.testing.assert_allclose(s, s.T)
        np.testing.assert_allclose(s @ s, np.eye(2), atol=1e-10)

    def test_frames_are_orthonormal(self, torus_mesh):
        n, e1, e2 = torus_mesh.vertex_normals, torus_mesh.frame_e1, torus_mesh.frame_e2
        np.testing.assert_allclose(np.einsum('ij,ij->i', e1, e2), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.einsum('ij,ij->i', n, e1), 0.0, atol=1e-12)
        np.testing.assert_allclose(np.cross(e1, e2), n, atol=1e-12)

    def test_summary_keys(self, sphere):
        report = sphere.summary()
        assert report['genus'] == 0
        assert report['vertices'] == 642
        assert abs(report['total_curvature_over_2pi'] - 2.0) < 1e-9


class TestGeodesic:

    def test_exp_of_zero_is_identity(self, torus_mesh):
        p = torus_mesh.vertex_point(5)
        q = exp_map(torus_mesh, p, np.zeros(3))
        np.testing.assert_allclose(q.position, p.position)

    def test_antipodal_distance(self, sphere):
        north = sphere.make_point(np.array([0.0, 0.0, 1.0]))
        south = sphere.make_point(np.array([0.0, 0.0, -1.0]))
        assert abs(geodesic_distance(sphere, north, south) - np.pi) < 1e-9

    def test_sphere_exp_log_roundtrip(self, sphere):
        p = sphere.make_point(np.array([0.3, -0.2, 0.9]))
        _, e1, e2 = sphere.point_frame(p)
        v = 0.1 * e1 - 0.05 * e2
        q = exp_map(sphere, p, v)
        np.testing.assert_allclose(log_map(sphere, p, q), v, atol=1e-9)

    def test_torus_exp_log_roundtrip(self, torus_mesh):
        p = torus_mesh.make_point(np.array([2.3, 0.4, 0.3]))
        _, e1, _ = torus_mesh.point_frame(p)
        v = 0.5 * torus_mesh.mean_edge_length * e1
        q = exp_map(torus_mesh, p, v)
        recovered = log_map(torus_mesh, p, q)
        assert np.linalg.norm(recovered - v) / np.linalg.norm(v) < 1e-2

    def test_step_beyond_trust_region(self, sphere):
        p = sphere.vertex_point(0)
        _, e1, _ = sphere.point_frame(p)
        with pytest.raises(StepTooLargeError):
            exp_map(sphere, p, 10.0 * sphere.mean_edge_length * e1)
        # trust=0 关闭检查
        exp_map(sphere, p, 10.0 * sphere.mean_edge_length * e1, trust=0)

    def test_min_separation_single_point(self, sphere):
        assert min_separation(sphere, [sphere.vertex_point(0)]) == float('inf')

    def test_surface_point_rejects_bad_bary(self):
        with pytest.raises(GeometryError):
            SurfacePoint(face=0, bary=np.array([0.5, 0.6, 0.2]), position=np.zeros(3))


class TestMeshIO:

    @pytest.mark.parametrize("suffix, writer", [(".off", write_off), (".obj", write_obj)])
    def test_write_then_read(self, tmp_path, small_sphere, suffix, writer):
        path = tmp_path / f"sphere{suffix}"
        writer(path, small_sphere.vertices, small_sphere.faces, comment="glvortex config_hash=abc")
        assert "config_hash=abc" in path.read_text(encoding='utf-8')
        vertices, faces = read_mesh(path)
        np.testing.assert_array_equal(faces, small_sphere.faces)
        np.testing.assert_allclose(vertices, small_sphere.vertices)

    def test_loaded_mesh_keeps_topology(self, tmp_path, torus_mesh):
        path = tmp_path / "torus.off"
        write_off(path, torus_mesh.vertices, torus_mesh.faces)
        geom = load_or_build(path)
        assert geom.genus() == 1
        assert geom.analytic is None

    def test_quad_faces_rejected(self, tmp_path):
        path = tmp_path / "quad.off"
        path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n", encoding='utf-8')
        with pytest.raises(GeometryError):
            read_mesh(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(GeometryError):
            read_mesh(tmp_path / "nothing.off")
