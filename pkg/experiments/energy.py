"""
energy 子命令 - 在一个涡旋周围的切平面网格上扫描 W 与 ∇W
"""

from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from errors import ConfigError
from experiments.base import Experiment
from experiments.config_loader import ExperimentConfig
from logger_config import setup_logger
from renormalized.gradient import fd_gradient_W
from renormalized.model import VortexConfiguration, VortexEnergyModel
from surface.geodesic import exp_map

logger = setup_logger(__name__)


class EnergyLandscapeExperiment(Experiment):
    """W 地形扫描"""

    def __init__(self):
        super().__init__("energy")

    def grid_configurations(self, model: VortexEnergyModel, base: VortexConfiguration, vortex: int,
                            grid: int, span: float) -> List[Dict[str, Any]]:
        """
        以 base 中第 vortex 个涡旋为中心，沿 (e1, e2) 方向各取 grid 个偏移
        Returns:
            [{'i', 'j', 's', 't', 'configuration'}]
        """
        geom = model.geom
        center = base.points[vortex]
        _, e1, e2 = geom.point_frame(center)
        offsets = np.linspace(-span, span, grid) if grid > 1 else np.zeros(1)
        cells = []
        for i, s in enumerate(offsets):
            for j, t in enumerate(offsets):
                points = list(base.points)
                points[vortex] = exp_map(geom, center, s * e1 + t * e2, trust=0)
                cells.append({'i': i, 'j': j, 's': float(s), 't': float(t),
                              'configuration': model.moved(base, points)})
        return cells

    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        out_dir = Path(out_dir)
        settings = experiment.energy
        geom = self.build_surface(experiment)
        self.validate_vortices(experiment, geom)
        ctx = self.context(experiment, geom)
        model = self.energy_model(experiment, ctx)
        base = model.evaluate(self.initial_configuration(experiment, model)).configuration

        vortex = int(settings['vortex'])
        if not 0 <= vortex < base.count:
            raise ConfigError("energy.vortex 超出涡旋编号范围", diagnostic={'vortex': vortex, 'count': base.count})
        grid = int(settings['grid'])
        span = float(settings['span_cells']) * ctx.cell
        with_gradient = bool(settings.get('gradient', True))

        rows = []
        values = []
        for cell in self.grid_configurations(model, base, vortex, grid, span):
            evaluation = model.evaluate(cell['configuration'])
            value = evaluation.value
            gradient = model.gradient(evaluation)[vortex] if with_gradient else np.full(3, np.nan)
            position = evaluation.configuration.points[vortex].position
            rows.append((cell['i'], cell['j'], cell['s'], cell['t'], *position, value.total, value.w_intr,
                         value.g_extr, *gradient))
            values.append([value.total, *gradient] if with_gradient else [value.total])
        columns = ['i', 'j', 's', 't', 'x', 'y', 'z', 'W', 'w_intr', 'g_extr', 'grad_x', 'grad_y', 'grad_z']
        self.output.write_csv(out_dir / 'landscape.csv', columns, rows, experiment.hash)

        finite = bool(np.all(np.isfinite(np.asarray(values, dtype=float))))
        if not finite:
            logger.warning("W 地形中出现非有限值")
        summary = {'experiment': experiment.name, 'grid': grid, 'span': span, 'vortex': vortex,
                   'finite': finite, 'W_min': float(min(r[7] for r in rows)),
                   'W_max': float(max(r[7] for r in rows)), 'config_hash': experiment.hash}

        if settings.get('fd_check', False):
            evaluation = model.evaluate(base)
            analytic = model.gradient(evaluation)
            numeric = fd_gradient_W(model, evaluation.configuration)
            error = float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-300))
            self.output.write_json(out_dir / 'fd_check.json',
                                   {'analytic': analytic, 'finite_difference': numeric, 'relative_error': error},
                                   experiment.hash)
            summary['fd_relative_error'] = error
            logger.info(f"梯度有限差分检验: 相对误差 {error:.3e}")
        return summary
