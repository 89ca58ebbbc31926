"""
重整化能量测试 - 可容许性、典范场、𝒢 与 θ、W 的分解与梯度、核能量
"""

import numpy as np
import pytest

from conftest import on_great_circle, poles
from errors import AdmissibilityError, ConfigError, PeriodDefectError, SeparationError
from fields.tangent import TangentField
from renormalized import (SurfaceContext, VortexConfiguration, VortexEnergyModel, admissible_xi, canonical_field,
                          check_admissible, core_energy, core_profile, current_residual, fd_gradient_G,
                          fd_gradient_W, feasible_separation, g_functional, period_constraint, solve_psi,
                          theta_critical, w_intrinsic)
from renormalized.gradient import extrinsic_gradient_term
from renormalized.model import point_from_record
from surface.builders import ellipsoid
from surface.geodesic import exp_map


@pytest.fixture(scope="module")
def sphere_model(sphere_ctx):
    return VortexEnergyModel(sphere_ctx)


@pytest.fixture(scope="module")
def antipodal(sphere_model):
    return sphere_model.configuration(poles(sphere_model.geom), [1, 1])


@pytest.fixture(scope="module")
def antipodal_eval(sphere_model, antipodal):
    return sphere_model.evaluate(antipodal)


@pytest.fixture(scope="module")
def ellipsoid_field(ellipsoid_ctx):
    points = poles(ellipsoid_ctx.geom, height=1.5)
    xi, _ = admissible_xi(ellipsoid_ctx, points, [1, 1])
    return canonical_field(ellipsoid_ctx, points, [1, 1], xi)


@pytest.fixture(scope="module")
def torus_model(torus_ctx):
    return VortexEnergyModel(torus_ctx, model='intrinsic')


@pytest.fixture(scope="module")
def torus_pair(torus_model):
    geom = torus_model.geom
    points = [geom.make_point(np.array([2.5, 0.0, 0.0])), geom.make_point(np.array([-2.5, 0.0, 0.0]))]
    return torus_model.configuration(points, [1, -1], integers=[0, 0])


@pytest.fixture(scope="module")
def refinement_study():
    """椭球面两级加密下 ∇W、∇𝒢 与中心差分的相对误差"""
    study = []
    for refine in (4, 5):
        ctx = SurfaceContext(ellipsoid((1.0, 1.0, 1.5), refine=refine))
        model = VortexEnergyModel(ctx)
        geom = ctx.geom
        configuration = model.configuration([geom.make_point(np.array([0.0, 0.0, 1.0])),
                                             on_great_circle(geom, 2.0)], [1, 1])
        evaluation = model.evaluate(configuration)
        critical = evaluation.configuration
        numeric = fd_gradient_W(model, critical)
        error_w = np.linalg.norm(model.gradient(evaluation) - numeric) / np.linalg.norm(numeric)
        numeric_g = fd_gradient_G(model, critical)
        term = extrinsic_gradient_term(ctx, critical.points, critical.degrees, critical.theta)
        error_g = np.linalg.norm(term - numeric_g) / np.linalg.norm(numeric_g)
        study.append({'W': error_w, 'G': error_g})
    return study


class TestAdmissibility:

    def test_degree_sum_must_match_euler_characteristic(self, sphere):
        with pytest.raises(AdmissibilityError):
            check_admissible(sphere, poles(sphere), [1, 0])

    def test_coincident_points(self, sphere):
        p = sphere.vertex_point(3)
        with pytest.raises(AdmissibilityError):
            check_admissible(sphere, [p, p], [1, 1])

    def test_count_mismatch(self, sphere):
        with pytest.raises(AdmissibilityError):
            check_admissible(sphere, poles(sphere), [2])

    def test_torus_without_vortices_is_admissible(self, torus_mesh):
        check_admissible(torus_mesh, [], [])

    def test_psi_solves_poisson(self, sphere_ctx):
        solution = solve_psi(sphere_ctx, poles(sphere_ctx.geom), [1, 1])
        assert solution.residual < 1e-9
        assert abs(sphere_ctx.dec.mean0(solution.psi)) < 1e-12

    def test_configuration_record_roundtrip(self, sphere, antipodal):
        restored = VortexConfiguration.from_record(sphere, antipodal.to_record())
        np.testing.assert_array_equal(restored.degrees, antipodal.degrees)
        np.testing.assert_allclose(restored.xi, antipodal.xi)
        assert np.abs(restored.positions() - antipodal.positions()).max() < 0.5 * sphere.mean_edge_length

    def test_point_records(self, sphere):
        by_vertex = point_from_record(sphere, {'vertex': 7})
        assert by_vertex.vertex == 7
        by_position = point_from_record(sphere, [0.0, 0.0, 2.0])
        np.testing.assert_allclose(by_position.position, [0.0, 0.0, 1.0], atol=1e-12)


class TestCanonicalField:

    def test_sphere_has_no_harmonic_part(self, antipodal):
        assert antipodal.xi.size == 0

    def test_unit_modulus_and_normalization(self, sphere_model, antipodal):
        canonical = sphere_model.canonical(antipodal)
        np.testing.assert_allclose(np.abs(canonical.values), 1.0, atol=1e-12)
        assert abs(canonical.values[canonical.b0] - sphere_model.w0) < 1e-12

    def test_rotation_fixes_normalization(self, sphere_ctx):
        points = poles(sphere_ctx.geom)
        base = canonical_field(sphere_ctx, points, [1, 1], np.zeros(0), b0=11)
        turned = canonical_field(sphere_ctx, points, [1, 1], np.zeros(0), b0=11, w0=np.exp(0.7j))
        np.testing.assert_allclose(turned.values, base.rotated(0.7).values, atol=1e-10)

    def test_current_matches_harmonic_part(self, sphere_model, antipodal):
        canonical = sphere_model.canonical(antipodal)
        assert current_residual(sphere_model.ctx, canonical, rings=2) < 0.25

    def test_torus_period_constraint(self, torus_ctx):
        xi, constraint = admissible_xi(torus_ctx, [], [])
        assert xi.size == 2
        np.testing.assert_allclose(constraint.defect(xi), 0.0, atol=1e-9)

    def test_torus_wrong_xi_rejected(self, torus_ctx):
        xi, _ = admissible_xi(torus_ctx, [], [])
        with pytest.raises(PeriodDefectError):
            canonical_field(torus_ctx, [], [], xi + 0.37)

    def test_torus_integers_select_xi(self, torus_ctx):
        xi0, _ = admissible_xi(torus_ctx, [], [], integers=[0, 0])
        xi1, constraint = admissible_xi(torus_ctx, [], [], integers=[1, 0])
        assert not np.allclose(xi0, xi1)
        np.testing.assert_array_equal(constraint.nearest_integers(xi1), [1, 0])


class TestTorusConfiguration:

    def test_moves_keep_periods_integral(self, torus_model, torus_pair):
        geom = torus_model.geom
        configuration = torus_pair
        for _ in range(6):
            point = configuration.points[0]
            _, e1, _ = geom.point_frame(point)
            step = exp_map(geom, point, 0.8 * geom.mean_edge_length * e1)
            configuration = torus_model.moved(configuration, [step, configuration.points[1]])
            canonical = torus_model.canonical(configuration)
            assert np.abs(canonical.period_defect).max() < 1e-8
            torus_model.validate(configuration)
        assert np.isfinite(torus_model.evaluate(configuration).value.total)

    def test_periods_do_not_depend_on_loops(self, torus_ctx, torus_pair):
        geom = torus_ctx.geom
        extra = [geom.make_point(np.array(p)) for p in ([0.0, 2.5, 0.0], [0.0, -2.5, 0.0], [0.0, 1.5, 0.0])]
        default = period_constraint(torus_ctx, torus_pair.points, torus_pair.degrees)
        detour = period_constraint(torus_ctx, torus_pair.points, torus_pair.degrees,
                                   avoid=torus_pair.points + extra)
        assert np.abs(detour.defect(torus_pair.xi)).max() < 1e-8
        gap = default.raw_periods(torus_pair.xi) - detour.raw_periods(torus_pair.xi)
        np.testing.assert_allclose(gap, np.rint(gap), atol=1e-8)

    def test_closed_current_form(self, torus_ctx, torus_pair):
        solution = solve_psi(torus_ctx, torus_pair.points, torus_pair.degrees)
        quanta = np.zeros(torus_ctx.geom.n_faces)
        for point, degree in zip(torus_pair.points, torus_pair.degrees):
            quanta[point.face] += degree
        curl = torus_ctx.dec.d1 @ solution.form + torus_ctx.conn.holonomy
        np.testing.assert_allclose(curl, 2.0 * np.pi * quanta, atol=1e-8)


class TestExtrinsicFunctional:

    def test_sphere_constant_phase(self, sphere_model, antipodal):
        geom = sphere_model.geom
        u = sphere_model.canonical(antipodal).field
        for c in (0.0, 1.3):
            value = g_functional(sphere_model.ctx, u, np.full(geom.n_vertices, c))
            assert abs(value - geom.total_area / 2.0) < 1e-10 * geom.total_area

    def test_shift_symmetry(self, ellipsoid_ctx, ellipsoid_field, rng):
        theta = 0.3 * rng.normal(size=ellipsoid_ctx.geom.n_vertices)
        kappa = 0.7
        rotated = TangentField(np.exp(1j * kappa) * ellipsoid_field.values)
        lhs = g_functional(ellipsoid_ctx, rotated, theta - kappa)
        rhs = g_functional(ellipsoid_ctx, ellipsoid_field.field, theta)
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)

    def test_sphere_theta_stays_constant(self, sphere_model, antipodal):
        u = sphere_model.canonical(antipodal).field
        start = np.full(sphere_model.geom.n_vertices, 0.4)
        solution = theta_critical(sphere_model.ctx, u, theta_init=start)
        assert solution.residual < 1e-8
        assert np.ptp(solution.theta) < 1e-8

    def test_ellipsoid_theta_converges(self, ellipsoid_ctx, ellipsoid_field):
        solution = theta_critical(ellipsoid_ctx, ellipsoid_field.field)
        assert solution.converged
        assert solution.residual < 1e-8
        zero = g_functional(ellipsoid_ctx, ellipsoid_field.field, np.zeros(ellipsoid_ctx.geom.n_vertices))
        assert solution.value <= zero + 1e-12

    def test_descent_history_decreases(self, ellipsoid_ctx, ellipsoid_field):
        solution = theta_critical(ellipsoid_ctx, ellipsoid_field.field)
        history = np.array(solution.history[:solution.iterations + 1])
        assert np.all(np.diff(history) <= 1e-12)


class TestRenormalizedEnergy:

    def test_additivity(self, antipodal_eval):
        value = antipodal_eval.value
        assert value.total == value.w_intr + value.g_extr

    def test_sphere_extrinsic_part(self, sphere_model, antipodal_eval):
        area = sphere_model.geom.total_area
        assert abs(antipodal_eval.value.g_extr - area / 2.0) < 1e-8 * area

    def test_intrinsic_extrapolation_table(self, sphere_model, antipodal):
        value = w_intrinsic(sphere_model.ctx, sphere_model.canonical(antipodal))
        assert value.table.size == 3
        assert np.isfinite(value.value)
        assert value.radii[0] == 2.0 * value.radii[1] == 4.0 * value.radii[2]

    def test_intrinsic_model_has_no_extrinsic_part(self, sphere_ctx):
        model = VortexEnergyModel(sphere_ctx, model='intrinsic')
        evaluation = model.evaluate(model.configuration(poles(sphere_ctx.geom), [1, 1]))
        assert evaluation.value.g_extr == 0.0
        assert evaluation.theta is None

    def test_antipodal_is_local_minimum(self, sphere_model, antipodal_eval):
        geom = sphere_model.geom
        moved = sphere_model.configuration([geom.make_point(np.array([0.0, 0.0, 1.0])),
                                            on_great_circle(geom, np.pi - 0.5)], [1, 1])
        assert sphere_model.evaluate(moved).value.total > antipodal_eval.value.total

    def test_unknown_model(self, sphere_ctx):
        with pytest.raises(ConfigError) as info:
            VortexEnergyModel(sphere_ctx, model='magnetic')
        assert info.value.module == 'renormalized-energy'

    def test_close_pair_cannot_be_truncated(self, sphere_ctx):
        geom = sphere_ctx.geom
        points = [geom.make_point(np.array([0.0, 0.0, 1.0])), on_great_circle(geom, 0.3)]
        canonical = canonical_field(sphere_ctx, points, [1, 1], np.zeros(0))
        assert 2.0 * np.sin(0.15) < feasible_separation(sphere_ctx.cell)
        with pytest.raises(SeparationError) as info:
            w_intrinsic(sphere_ctx, canonical)
        assert info.value.diagnostic['rho_min'] < sphere_ctx.cell


class TestGradient:

    def test_sphere_extrinsic_term_vanishes(self, sphere_model, antipodal_eval):
        term = extrinsic_gradient_term(sphere_model.ctx, antipodal_eval.configuration.points, [1, 1],
                                       antipodal_eval.theta.theta)
        assert np.abs(term).max() < 1e-8

    def test_gradient_is_tangent(self, sphere_model, antipodal_eval):
        gradient = sphere_model.gradient(antipodal_eval)
        for point, g in zip(antipodal_eval.configuration.points, gradient):
            normal, _, _ = sphere_model.geom.point_frame(point)
            assert abs(np.dot(normal, g)) < 1e-10

    def test_antipodal_is_nearly_critical(self, sphere_model, antipodal_eval):
        geom = sphere_model.geom
        quarter = sphere_model.configuration([geom.make_point(np.array([0.0, 0.0, 1.0])),
                                              on_great_circle(geom, np.pi / 2)], [1, 1])
        g_antipodal = np.linalg.norm(sphere_model.gradient(antipodal_eval), axis=1).max()
        g_quarter = np.linalg.norm(sphere_model.gradient(sphere_model.evaluate(quarter)), axis=1).max()
        assert g_antipodal < 0.3
        assert g_quarter > 1.0

    def test_rotation_equivariance(self, sphere_model):
        geom = sphere_model.geom
        rotation = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        start = [np.array([0.0, 0.0, 1.0]), np.array([np.sin(2.0), 0.0, np.cos(2.0)])]
        gradients = []
        for positions in (start, [rotation @ p for p in start]):
            configuration = sphere_model.configuration([geom.make_point(p) for p in positions], [1, 1])
            gradients.append(sphere_model.gradient(sphere_model.evaluate(configuration)))
        turned = gradients[0] @ rotation.T
        assert np.linalg.norm(turned - gradients[1]) < 0.1 * np.linalg.norm(gradients[0])

    def test_matches_finite_differences(self, refinement_study):
        coarse, fine = refinement_study
        assert fine['W'] < 5e-2
        assert fine['W'] < coarse['W']

    def test_extrinsic_term_matches_finite_differences(self, refinement_study):
        # θ 固定时 𝒢 对涡旋位置的导数
        coarse, fine = refinement_study
        assert coarse['G'] < 0.25
        assert fine['G'] < coarse['G'] + 0.02


class TestCoreEnergy:

    def test_profile_bounds(self):
        profile = core_profile()
        r = np.linspace(0.0, 40.0, 801)
        f = profile(r)
        assert f[0] == 0.0
        assert np.all((f >= 0.0) & (f <= 1.0))
        assert np.all(np.diff(f) >= -1e-3)
        assert f[-1] > 0.999

    def test_gamma_extrapolation_is_consistent(self):
        result = core_energy()
        assert np.isfinite(result.gamma)
        assert result.error < 1e-3
        estimates = np.array(result.estimates)
        assert abs(estimates[2] - estimates[1]) <= abs(estimates[1] - estimates[0]) + 1e-10

    def test_gamma_is_cached(self):
        assert core_energy() is core_energy()

    def test_profile_derivative(self):
        profile = core_profile()
        assert profile.derivative(0.0) == profile.slope
        assert profile.slope > 0.0
        assert 0.0 < profile.derivative(5.0) < profile.slope
