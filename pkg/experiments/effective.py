"""
effective 子命令 - 积分有效涡旋 ODE，写出 W(t)、涡旋位置与速度、ξ(t) 与耗散账本
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from effective.dynamics import EffectiveTrajectory, run_effective
from experiments.base import Experiment
from experiments.config_loader import ExperimentConfig
from logger_config import setup_logger
from renormalized.context import SurfaceContext

logger = setup_logger(__name__)


class EffectiveExperiment(Experiment):
    """有效动力学实验"""

    def __init__(self):
        super().__init__("effective")

    def integrate(self, experiment: ExperimentConfig,
                  ctx: Optional[SurfaceContext] = None) -> Tuple[SurfaceContext, EffectiveTrajectory]:
        if ctx is None:
            ctx = self.context(experiment, self.build_surface(experiment))
        model = self.energy_model(experiment, ctx)
        configuration = self.initial_configuration(experiment, model)
        params = experiment.overrides('effective')
        return ctx, run_effective(model, configuration, params=params)

    def write_trajectory(self, experiment: ExperimentConfig, ctx: SurfaceContext, trajectory: EffectiveTrajectory,
                         directory: Path) -> Dict[str, Any]:
        output = self.output
        digest = experiment.hash

        rows = []
        for state, ledger in zip(trajectory.states, trajectory.ledger):
            value = state.evaluation.value
            rows.append((state.t, value.total, value.w_intr, value.g_extr, state.gradient_norm(), ledger,
                         state.h, state.halvings, state.stalled))
        output.write_csv(directory / 'effective.csv',
                         ['t', 'W', 'w_intr', 'g_extr', 'grad_norm', 'dissipation', 'h', 'halvings', 'stalled'],
                         rows, digest)

        vortex_rows = []
        for state in trajectory.states:
            configuration = state.configuration
            for k, (point, degree) in enumerate(zip(configuration.points, configuration.degrees)):
                vortex_rows.append((state.t, k, degree, *point.position, *state.velocity[k], point.face))
        output.write_csv(directory / 'effective_vortices.csv',
                         ['t', 'vortex_id', 'degree', 'x', 'y', 'z', 'v_x', 'v_y', 'v_z', 'face'],
                         vortex_rows, digest)

        dimension = ctx.harmonic_dimension
        xi = trajectory.xi_series()
        xi_rows = [(state.t, *xi[k], *trajectory.integers[k]) for k, state in enumerate(trajectory.states)]
        output.write_csv(directory / 'effective_xi.csv',
                         ['t'] + [f"xi_{m}" for m in range(dimension)] + [f"k_{m}" for m in range(dimension)],
                         xi_rows, digest)

        summary = {
            'reason': trajectory.reason,
            'samples': len(trajectory),
            't_final': float(trajectory.times[-1]),
            'W_initial': float(trajectory.energies[0]),
            'W_final': float(trajectory.energies[-1]),
            'ledger_imbalance': trajectory.ledger_imbalance(),
            'model': experiment.model,
            'diagnostics': trajectory.diagnostics,
            'initial_configuration': trajectory.states[0].configuration.to_record(),
            'final_configuration': trajectory.states[-1].configuration.to_record(),
        }
        output.write_json(directory / 'effective.json', summary, digest)
        return summary

    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        geom = self.build_surface(experiment)
        self.validate_vortices(experiment, geom)
        ctx, trajectory = self.integrate(experiment, self.context(experiment, geom))
        summary = self.write_trajectory(experiment, ctx, trajectory, Path(out_dir))
        return {'experiment': experiment.name, 'reason': summary['reason'], 'samples': summary['samples'],
                'W_initial': summary['W_initial'], 'W_final': summary['W_final'],
                'ledger_imbalance': summary['ledger_imbalance'], 'config_hash': experiment.hash}
