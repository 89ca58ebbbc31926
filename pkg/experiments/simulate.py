"""
simulate 子命令 - 对每个 ε 运行 GL 流，写出能量、涡旋轨迹、调和通量与场快照
每个 ε 写入自己的子目录，--jobs > 1 时用进程池并行
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from experiments.base import Experiment
from experiments.config_loader import ExperimentConfig, parse_config
from experiments.output import configure_output
from fields.tangent import current_j, vorticity
from flow.gl_flow import FlowConfig, GLFlowSolver
from flow.initial import prepare_initial
from flow.trajectory import FlowTrajectory, excess_energy, flux_series
from logger_config import setup_logger
from renormalized.context import SurfaceContext
from renormalized.model import VortexConfiguration, VortexEnergyModel

logger = setup_logger(__name__)


def epsilon_dir(out_dir: Path, epsilon: float) -> Path:
    return Path(out_dir) / f"eps_{epsilon:.6g}"


class SimulateExperiment(Experiment):
    """ε 扫描的 GL 流实验"""

    def __init__(self):
        super().__init__("simulate")

    def flow_config(self, experiment: ExperimentConfig, epsilon: float) -> FlowConfig:
        values = {**experiment.overrides('flow'), 'epsilon': epsilon, 'model': experiment.model}
        return FlowConfig.from_dict(values, tracking=experiment.overrides('tracking'))

    def run_flow(self, experiment: ExperimentConfig, ctx: SurfaceContext, model: VortexEnergyModel,
                 configuration: VortexConfiguration, epsilon: float) -> FlowTrajectory:
        """从良态初值积分 GL 流"""
        flow_config = self.flow_config(experiment, epsilon)
        model.canonical(configuration)
        u0 = prepare_initial(ctx, configuration.points, configuration.degrees, configuration.xi,
                             configuration.theta, epsilon, b0=model.b0, w0=model.w0,
                             params=experiment.overrides('flow'))
        return GLFlowSolver(ctx, flow_config).run(u0)

    def write_flow(self, experiment: ExperimentConfig, ctx: SurfaceContext, trajectory: FlowTrajectory,
                   gamma: float, directory: Path) -> Dict[str, Any]:
        """写出单个 ε 的全部文件，返回摘要"""
        output = self.output
        digest = experiment.hash
        n = len(experiment.degrees())
        phi = excess_energy(trajectory, gamma, n=n)

        rows = []
        for sample, value in zip(trajectory.samples, phi):
            e = sample.energy
            rows.append((sample.t, sample.step, e.total, e.dirichlet, e.extrinsic, e.potential, value,
                         sample.max_norm, sample.dissipation, len(sample.vortices),
                         sum(v.degree for v in sample.vortices)))
        output.write_csv(directory / 'trajectory.csv',
                         ['t', 'step', 'energy', 'dirichlet', 'extrinsic', 'potential', 'phi', 'max_norm',
                          'dissipation', 'vortex_count', 'degree_sum'], rows, digest)

        vortex_rows = []
        for sample in trajectory.samples:
            for vortex_id, vortex in zip(sample.vortex_ids, sample.vortices):
                vortex_rows.append((sample.t, vortex_id, vortex.degree, vortex.charge, *vortex.position,
                                    vortex.point.face))
        output.write_csv(directory / 'vortices.csv',
                         ['t', 'vortex_id', 'degree', 'charge', 'x', 'y', 'z', 'face'], vortex_rows, digest)

        flux = flux_series(trajectory)
        dimension = ctx.harmonic_dimension
        flux_rows = [(sample.t, *flux[k]) for k, sample in enumerate(trajectory.samples)]
        output.write_csv(directory / 'flux.csv', ['t'] + [f"xi_{m}" for m in range(dimension)],
                         flux_rows, digest)

        snapshots = [s for s in trajectory.samples if s.snapshot is not None]
        for k, sample in enumerate(snapshots):
            output.write_field(directory / 'snapshots' / f"field_{k:04d}.csv", sample.snapshot, digest)
        if snapshots:
            final = snapshots[-1].snapshot
            output.write_ambient_field(directory / 'field_final_ambient.csv', ctx.geom, final, digest)
            j, _ = current_j(final, ctx.conn)
            output.write_cochain(directory / 'current_final.csv', j, digest, entity='edge')
            output.write_cochain(directory / 'vorticity_final.csv', vorticity(final, ctx.conn), digest,
                                 entity='face')

        summary = {
            'epsilon': trajectory.epsilon,
            'model': trajectory.model,
            'samples': len(trajectory),
            't_final': float(trajectory.times[-1]),
            't_star': trajectory.t_star,
            'event': trajectory.event,
            'initial_event': trajectory.initial_event,
            'final_energy': float(trajectory.total_energy()[-1]),
            'initial_phi': float(phi[0]),
            'final_phi': float(phi[-1]),
            'halvings': trajectory.halvings,
            'gamma': gamma,
            'degree_sums': trajectory.degree_sums(),
        }
        output.write_json(directory / 'summary.json', summary, digest)
        return summary

    def simulate_epsilon(self, experiment: ExperimentConfig, epsilon: float, out_dir: Path,
                         ctx: Optional[SurfaceContext] = None,
                         keep_snapshots: bool = False) -> Tuple[Dict[str, Any], FlowTrajectory]:
        """
        单个 ε 的完整任务（可在子进程中执行）
        Returns:
            (摘要, 轨迹)；keep_snapshots 为 False 时返回的轨迹不含场快照
        """
        if ctx is None:
            ctx = self.context(experiment, self.build_surface(experiment))
        model = self.energy_model(experiment, ctx)
        configuration = self.initial_configuration(experiment, model)
        trajectory = self.run_flow(experiment, ctx, model, configuration, epsilon)
        summary = self.write_flow(experiment, ctx, trajectory, self.gamma(experiment),
                                  epsilon_dir(out_dir, epsilon))
        if not keep_snapshots:
            trajectory.samples = [replace(s, snapshot=None) for s in trajectory.samples]
        return summary, trajectory

    def sweep(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1,
              ctx: Optional[SurfaceContext] = None) -> List[Tuple[Dict[str, Any], FlowTrajectory]]:
        """对 experiment.epsilons 逐个（或并行）运行，结果按 ε 顺序返回"""
        if jobs > 1 and len(experiment.epsilons) > 1:
            logger.info(f"并行运行 {len(experiment.epsilons)} 个 ε 任务（{jobs} 个进程）")
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_simulate_job, experiment.raw, experiment.source, epsilon, str(out_dir))
                           for epsilon in experiment.epsilons]
                return [future.result() for future in futures]
        if ctx is None:
            ctx = self.context(experiment, self.build_surface(experiment))
        return [self.simulate_epsilon(experiment, epsilon, out_dir, ctx=ctx) for epsilon in experiment.epsilons]

    def write_sweep(self, experiment: ExperimentConfig, summaries: List[Dict[str, Any]], out_dir: Path):
        rows = [(s['epsilon'], abs(np.log(s['epsilon'])), s['samples'], s['t_final'],
                 np.nan if s['t_star'] is None else s['t_star'], s['final_energy'], s['initial_phi'],
                 s['final_phi'], s['halvings']) for s in summaries]
        self.output.write_csv(Path(out_dir) / 'sweep.csv',
                              ['epsilon', 'log_eps', 'samples', 't_final', 't_star', 'final_energy',
                               'initial_phi', 'final_phi', 'halvings'], rows, experiment.hash)

    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        geom = self.build_surface(experiment)
        self.validate_vortices(experiment, geom)
        ctx = self.context(experiment, geom) if jobs <= 1 else None
        results = self.sweep(experiment, out_dir, jobs=jobs, ctx=ctx)
        summaries = [summary for summary, _ in results]
        self.write_sweep(experiment, summaries, out_dir)
        stopped = [s['epsilon'] for s in summaries if s['t_star'] is not None]
        return {'experiment': experiment.name, 'epsilons': len(summaries),
                'stopped_at_t_star': len(stopped), 'config_hash': experiment.hash}


def _simulate_job(raw: Dict[str, Any], source: Optional[str], epsilon: float,
                  out_dir: str) -> Tuple[Dict[str, Any], FlowTrajectory]:
    """进程池任务：子进程内重建曲面与上下文"""
    experiment = parse_config(raw, source=source)
    configure_output(experiment.section('output'))
    return SimulateExperiment().simulate_epsilon(experiment, epsilon, Path(out_dir))
