"""
GL 流测试 - 参数校验、良态初值、能量单调性与涡旋追踪
"""

import numpy as np
import pytest

from config import TRACKING_CONFIG
from conftest import on_great_circle, poles
from effective import compare, run_effective
from errors import AdmissibilityError, FlowError, StabilityError
from fields.energy import energy
from flow import (FlowConfig, GLFlowSolver, TrackedVortex, VortexTrajectoryTracker, degree_sum, excess_energy,
                  prepare_initial, track_vortices)
from flow.initial import core_cutoff
from renormalized import VortexEnergyModel, admissible_xi, canonical_field, core_energy
from renormalized.context import SurfaceContext
from surface.builders import icosphere


@pytest.fixture(scope="module")
def sphere_initial(sphere_ctx):
    return prepare_initial(sphere_ctx, poles(sphere_ctx.geom), [1, 1], np.zeros(0), None, epsilon=0.2)


@pytest.fixture(scope="module")
def short_run(sphere_ctx, sphere_initial):
    cfg = FlowConfig(epsilon=0.2, dt=2e-3, T=0.01, stride=1, stop_at_collision=False)
    return GLFlowSolver(sphere_ctx, cfg).run(sphere_initial)


class TestFlowConfig:

    def test_defaults_from_config(self):
        cfg = FlowConfig.from_dict({'epsilon': 0.05})
        assert cfg.epsilon == 0.05
        assert cfg.scheme == 'semi_implicit'
        assert 'mass_fraction' in cfg.tracking

    def test_unknown_keys_ignored(self):
        cfg = FlowConfig.from_dict({'dt': 0.01, 'not_a_key': 1})
        assert cfg.dt == 0.01

    @pytest.mark.parametrize("values", [{'epsilon': 0.0}, {'dt': -1.0}, {'T': -0.1}, {'scheme': 'rk4'},
                                        {'model': 'magnetic'}])
    def test_invalid_values(self, values):
        with pytest.raises(FlowError):
            FlowConfig.from_dict(values)

    def test_explicit_scheme_stability(self, sphere_ctx):
        cfg = FlowConfig(epsilon=0.1, dt=1.0, scheme='explicit')
        with pytest.raises(StabilityError) as info:
            GLFlowSolver(sphere_ctx, cfg)
        assert info.value.diagnostic['dt_max'] < 1.0


class TestInitialData:

    def test_cutoff_profile(self):
        r = np.linspace(0.0, 3.0, 50)
        values = core_cutoff(r, 0.1, 8.0)
        assert values[0] == 0.0
        assert np.all(values[r >= 0.8] == 1.0)
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_bounded_by_one(self, sphere_initial):
        assert sphere_initial.max_norm() <= 1.0 + 1e-12
        assert sphere_initial.norms().min() < 0.5

    def test_requires_unit_degrees(self, sphere_ctx):
        with pytest.raises(AdmissibilityError):
            prepare_initial(sphere_ctx, [sphere_ctx.geom.vertex_point(0)], [2], np.zeros(0), None, epsilon=0.2)

    def test_requires_positive_epsilon(self, sphere_ctx):
        with pytest.raises(FlowError):
            prepare_initial(sphere_ctx, poles(sphere_ctx.geom), [1, 1], np.zeros(0), None, epsilon=0.0)


class TestFlowRun:

    def test_samples_cover_interval(self, short_run):
        times = short_run.times
        assert times[0] == 0.0
        assert abs(times[-1] - 0.01) < 1e-12
        assert np.all(np.diff(times) > 0)

    def test_energy_non_increasing(self, short_run):
        energies = short_run.total_energy()
        assert np.all(np.diff(energies) <= 1e-10)

    def test_modulus_bound(self, short_run):
        assert max(s.max_norm for s in short_run.samples) <= 1.0 + 1e-12

    def test_dissipation_accumulates(self, short_run):
        dissipation = np.array([s.dissipation for s in short_run.samples])
        assert dissipation[0] == 0.0
        assert np.all(np.diff(dissipation) >= 0.0)

    def test_sphere_has_no_flux(self, short_run):
        assert all(s.flux.size == 0 for s in short_run.samples)

    def test_excess_energy_offset(self, short_run):
        gamma = core_energy().gamma
        phi = excess_energy(short_run, gamma, n=2)
        offset = 2.0 * np.pi * abs(np.log(0.2)) + 2.0 * gamma
        np.testing.assert_allclose(phi, short_run.total_energy() - offset)


class TestTracking:

    def test_unit_field_vortices(self, sphere_ctx):
        points = poles(sphere_ctx.geom)
        canonical = canonical_field(sphere_ctx, points, [1, 1], np.zeros(0))
        vortices = track_vortices(canonical.field, sphere_ctx.conn)
        assert len(vortices) == 2
        assert degree_sum(vortices) == 2
        h = sphere_ctx.cell
        for vortex in vortices:
            gaps = [np.linalg.norm(vortex.position - p.position) for p in points]
            assert min(gaps) < 2.0 * h

    def test_torus_vortex_free_field(self, torus_ctx):
        xi, _ = admissible_xi(torus_ctx, [], [])
        canonical = canonical_field(torus_ctx, [], [], xi)
        assert track_vortices(canonical.field, torus_ctx.conn) == []

    def test_initial_sample_degree_sum(self, short_run):
        assert short_run.degree_sums()[0] == 2


def _vortex(geom, xyz, degree=1):
    point = geom.make_point(np.asarray(xyz, dtype=float))
    return TrackedVortex(point=point, degree=degree, charge=float(degree), faces=np.array([point.face]))


class TestTrajectoryTracker:

    @pytest.fixture
    def tracker(self):
        # 合并半径 3·0.1
        return VortexTrajectoryTracker(dict(TRACKING_CONFIG), cell=0.1, expected_degree_sum=2)

    def test_ids_follow_positions(self, sphere, tracker):
        north, south = _vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])
        assert tracker.update_tracking(0.0, [north, south]) is None
        assert tracker.last_ids == [0, 1]
        assert tracker.update_tracking(0.1, [south, north]) is None
        assert tracker.last_ids == [1, 0]

        status = tracker.get_tracking_status()
        assert set(status) == {0, 1}
        assert all(s['active'] and s['samples'] == 2 and s['degree'] == 1 for s in status.values())
        np.testing.assert_allclose(status[0]['last_position'], north.position)

    def test_collision_event(self, sphere, tracker):
        assert tracker.update_tracking(0.0, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])]) is None
        event = tracker.update_tracking(0.1, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0.1, 0, 1])])
        assert event['reason'] == 'collision'
        assert event['separation'] < tracker.merge_radius
        # 只报告第一次事件
        assert tracker.update_tracking(0.2, [_vortex(sphere, [0, 0, 1])]) is None
        assert tracker.event['t'] == 0.1

    def test_count_change_event(self, sphere, tracker):
        assert tracker.update_tracking(0.0, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])]) is None
        pair = [_vortex(sphere, [1, 0, 0], 1), _vortex(sphere, [-1, 0, 0], -1)]
        event = tracker.update_tracking(0.2, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])] + pair)
        assert event == {'t': 0.2, 'reason': 'count_change', 'count': 4}

    def test_degree_sum_failure(self, sphere, tracker):
        assert tracker.update_tracking(0.0, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])]) is None
        event = tracker.update_tracking(0.1, [_vortex(sphere, [0, 0, 1])])
        assert event['reason'] == 'tracking_failure'
        assert event['degree_sum'] == 1

    def test_initial_failure_does_not_mask_later_events(self, sphere, tracker):
        # 初始采样只检测到一个涡旋
        assert tracker.update_tracking(0.0, [_vortex(sphere, [0, 0, 1])]) is None
        assert tracker.initial_event['reason'] == 'tracking_failure'
        assert tracker.event is None
        assert tracker.update_tracking(0.1, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0, 0, -1])]) is None
        event = tracker.update_tracking(0.2, [_vortex(sphere, [0, 0, 1]), _vortex(sphere, [0.1, 0, 1])])
        assert event['reason'] == 'collision'
        assert event['t'] == 0.2
        assert tracker.initial_event['t'] == 0.0


class TestFixedPoint:

    def test_relaxed_state_is_fixed_point(self, sphere_ctx, sphere_initial):
        solver = GLFlowSolver(sphere_ctx, FlowConfig(epsilon=0.2, dt=1.0, T=1e3, stop_at_collision=False))
        state = solver.initial_state(sphere_initial)
        for _ in range(300):
            state = solver.step(state)
        after = solver.step(state)
        assert abs(after.energy.total - state.energy.total) < 1e-8

    def test_initial_sample_has_no_event(self, short_run):
        assert short_run.initial_event is None


@pytest.fixture(scope="module")
def sweep_ctx():
    """10242 个顶点的单位球面，ε 扫描共用"""
    return SurfaceContext(icosphere(refine=5))


@pytest.mark.slow
class TestEpsilonSweep:

    def test_initial_energy_closure_shrinks(self, sweep_ctx):
        geom = sweep_ctx.geom
        points = poles(geom)
        model = VortexEnergyModel(sweep_ctx)
        w = model.evaluate(model.configuration(points, [1, 1])).value.total
        gamma = core_energy().gamma
        gaps = []
        for epsilon in (0.2, 0.1):
            u0 = prepare_initial(sweep_ctx, points, [1, 1], np.zeros(0), None, epsilon=epsilon)
            total = energy(geom, sweep_ctx.conn, u0, epsilon).total
            gaps.append(abs(total - (2.0 * np.pi * abs(np.log(epsilon)) + w + 2.0 * gamma)))
        assert gaps[1] < gaps[0]

    def test_flow_approaches_effective_dynamics(self, sweep_ctx):
        geom = sweep_ctx.geom
        points = [geom.make_point(np.array([0.0, 0.0, 1.0])), on_great_circle(geom, 2.0)]
        model = VortexEnergyModel(sweep_ctx)
        eff = run_effective(model, model.configuration(points, [1, 1]), T=0.05, h=0.005)
        gamma = core_energy().gamma
        deviations = []
        for epsilon in (0.1, 0.05):
            u0 = prepare_initial(sweep_ctx, points, [1, 1], np.zeros(0), None, epsilon=epsilon)
            cfg = FlowConfig(epsilon=epsilon, dt=1e-3, T=0.05, stride=5, keep_snapshots=False)
            gl = GLFlowSolver(sweep_ctx, cfg).run(u0)
            deviations.append(compare(geom, gl, eff, gamma).max_deviation)
        assert deviations[1] < deviations[0]
