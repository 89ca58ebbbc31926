"""
有效动力学测试 - 对称构型的静止性、能量下降与轨迹比较
"""

import numpy as np
import pytest

from config import EFFECTIVE_CONFIG
from conftest import on_great_circle, poles
from effective import collision_threshold, compare, evaluate_state, match_vortices, run_effective
from errors import CollisionError, EffectiveDynamicsError
from fields.energy import EnergyBreakdown
from flow import FlowSample, FlowTrajectory, TrackedVortex
from renormalized import SurfaceContext, VortexEnergyModel, feasible_separation
from surface.builders import icosphere, torus


@pytest.fixture(scope="module")
def sphere_model(sphere_ctx):
    return VortexEnergyModel(sphere_ctx)


@pytest.fixture(scope="module")
def antipodal_run(sphere_model):
    configuration = sphere_model.configuration(poles(sphere_model.geom), [1, 1])
    return run_effective(sphere_model, configuration, T=0.004, h=0.001)


@pytest.fixture(scope="module")
def fine_torus_ctx():
    return SurfaceContext(torus(2.0, 0.5, nu=64, nv=32))


@pytest.fixture(scope="module")
def ledger_runs(sphere_ctx):
    """非对称构型在两级网格与两种步长下的耗散账目"""
    fine_ctx = SurfaceContext(icosphere(refine=4))
    runs = {}
    for name, ctx, h in (('coarse', sphere_ctx, 0.01), ('fine', fine_ctx, 0.01), ('fine_half', fine_ctx, 0.005)):
        model = VortexEnergyModel(ctx)
        geom = ctx.geom
        configuration = model.configuration([geom.make_point(np.array([0.0, 0.0, 1.0])),
                                             on_great_circle(geom, 2.0)], [1, 1])
        runs[name] = run_effective(model, configuration, T=0.1, h=h)
    return runs


def mirror_flow(eff, epsilon=0.1, gamma=0.0):
    """与有效轨迹逐点重合的 GL 轨迹（能量取 φ = W）"""
    n = len(eff.states[0].configuration.points)
    offset = np.pi * n * abs(np.log(epsilon)) + n * gamma
    trajectory = FlowTrajectory(epsilon=epsilon)
    for k, state in enumerate(eff.states):
        configuration = state.configuration
        vortices = [TrackedVortex(point=p, degree=int(d), charge=float(d), faces=np.array([p.face]))
                    for p, d in zip(configuration.points, configuration.degrees)]
        trajectory.samples.append(FlowSample(
            t=state.t, step=k, energy=EnergyBreakdown(dirichlet=state.W + offset, extrinsic=0.0, potential=0.0),
            vortices=vortices, vortex_ids=list(range(n)), flux=np.zeros(0), max_norm=1.0, dissipation=0.0))
    return trajectory


class TestRunEffective:

    def test_reaches_final_time(self, antipodal_run):
        assert antipodal_run.reason == 'final_time'
        assert abs(antipodal_run.times[-1] - 0.004) < 1e-12

    def test_antipodal_is_stationary(self, sphere_model, antipodal_run):
        start = antipodal_run.states[0].configuration.positions()
        end = antipodal_run.states[-1].configuration.positions()
        assert np.linalg.norm(end - start, axis=1).max() < 2.0 * sphere_model.ctx.cell

    def test_energy_non_increasing(self, antipodal_run):
        assert np.all(np.diff(antipodal_run.energies) <= 1e-9)

    def test_ledger_is_monotone(self, antipodal_run):
        assert antipodal_run.ledger[0] == 0.0
        assert np.all(np.diff(antipodal_run.ledger) >= 0.0)

    def test_zero_final_time(self, sphere_model):
        configuration = sphere_model.configuration(poles(sphere_model.geom), [1, 1])
        trajectory = run_effective(sphere_model, configuration, T=0.0)
        assert len(trajectory) == 1
        assert trajectory.reason == 'final_time'

    def test_invalid_step(self, sphere_model):
        configuration = sphere_model.configuration(poles(sphere_model.geom), [1, 1])
        with pytest.raises(EffectiveDynamicsError):
            run_effective(sphere_model, configuration, T=0.1, h=0.0)


    def test_ledger_on_moving_pair(self, ledger_runs):
        for trajectory in ledger_runs.values():
            assert trajectory.reason == 'final_time'
            assert trajectory.energies[0] - trajectory.energies[-1] > 0.0
        assert ledger_runs['fine'].ledger_imbalance() < 0.05
        assert ledger_runs['fine_half'].ledger_imbalance() < 0.05

    def test_ledger_improves_under_refinement(self, ledger_runs):
        assert ledger_runs['fine'].ledger_imbalance() < ledger_runs['coarse'].ledger_imbalance()


class TestCollision:

    def test_threshold_covers_truncation(self, sphere_model):
        h = sphere_model.ctx.cell
        threshold = collision_threshold(sphere_model)
        assert threshold >= feasible_separation(h, sphere_model.params)
        assert threshold >= EFFECTIVE_CONFIG['collision_cells'] * h

    def test_close_pair_is_a_collision(self, sphere_model):
        geom = sphere_model.geom
        configuration = sphere_model.configuration([geom.make_point(np.array([0.0, 0.0, 1.0])),
                                                    on_great_circle(geom, 0.3)], [1, 1])
        with pytest.raises(CollisionError):
            evaluate_state(sphere_model, configuration)

    def test_attracting_pair_stops_at_collision(self, fine_torus_ctx):
        model = VortexEnergyModel(fine_torus_ctx, model='intrinsic')
        geom = model.geom
        # 外赤道上关于 xz 平面对称的一对 ±1
        chord = collision_threshold(model) + 2.0 * model.ctx.cell
        phi = np.arcsin(chord / 5.0)
        points = [geom.make_point(np.array([2.5 * np.cos(phi), side * 2.5 * np.sin(phi), 0.0]))
                  for side in (1.0, -1.0)]
        trajectory = run_effective(model, model.configuration(points, [1, -1]), T=0.5, h=0.01)
        assert trajectory.reason == 'collision'
        report = trajectory.diagnostics['collision']
        assert report['separation'] < report['threshold']
        assert np.all(np.diff(trajectory.energies) <= 1e-9)

class TestCompare:

    def test_identical_trajectories(self, sphere_model, antipodal_run):
        report = compare(sphere_model.geom, mirror_flow(antipodal_run), antipodal_run, gamma=0.0)
        assert report.max_deviation < 1e-8
        np.testing.assert_allclose(report.energy_gap, 0.0, atol=1e-9)
        assert report.inequality_holds
        assert report.times.size == len(antipodal_run)

    def test_energy_below_W_is_flagged(self, sphere_model, antipodal_run):
        low = mirror_flow(antipodal_run, gamma=1.0)
        report = compare(sphere_model.geom, low, antipodal_run, gamma=2.0)
        assert not report.inequality_holds

    def test_match_requires_same_degrees(self, sphere):
        points = poles(sphere)
        with pytest.raises(EffectiveDynamicsError):
            match_vortices(sphere, points, points, [1, 1], [2, 0])

    def test_match_is_permutation_invariant(self, sphere):
        points = poles(sphere)
        order, total = match_vortices(sphere, points, points[::-1], [1, 1], [1, 1])
        np.testing.assert_array_equal(order, [1, 0])
        assert total < 1e-9
