"""
info 子命令 - 曲面几何报告：χ、亏格、面积、曲率总量与调和维数
"""

from pathlib import Path
from typing import Any, Dict

from experiments.base import Experiment
from experiments.config_loader import ExperimentConfig
from logger_config import setup_logger
from surface.base import SurfaceGeometry

logger = setup_logger(__name__)


class InfoExperiment(Experiment):
    """几何报告"""

    def __init__(self):
        super().__init__("info")

    def report(self, experiment: ExperimentConfig, geom: SurfaceGeometry) -> Dict[str, Any]:
        ctx = self.context(experiment, geom)
        report = geom.summary()
        report['harmonic_dimension'] = ctx.harmonic_dimension
        report['homology_loops'] = len(ctx.loops)
        report['mean_edge_length'] = ctx.cell
        return report

    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        out_dir = Path(out_dir)
        geom = self.build_surface(experiment)
        report = self.report(experiment, geom)
        self.output.write_json(out_dir / 'info.json', report, experiment.hash)
        self.output.write_mesh(out_dir / 'surface.off', geom, experiment.hash)
        return {'name': report['name'], 'vertices': report['vertices'], 'faces': report['faces'],
                'euler_characteristic': report['euler_characteristic'], 'genus': report['genus'],
                'area': report['area'], 'total_curvature_over_2pi': report['total_curvature_over_2pi'],
                'harmonic_dimension': report['harmonic_dimension']}
