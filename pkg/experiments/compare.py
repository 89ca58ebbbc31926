"""
compare 子命令 - 有效动力学与各 ε 的 GL 流逐一比较，给出偏差随 ε 的变化
"""

from pathlib import Path
from typing import Any, Dict

import numpy as np

from effective.compare import ComparisonReport, compare
from experiments.base import Experiment
from experiments.config_loader import ExperimentConfig
from experiments.effective import EffectiveExperiment
from experiments.simulate import SimulateExperiment, epsilon_dir
from logger_config import setup_logger

logger = setup_logger(__name__)


class CompareExperiment(Experiment):
    """GL 流与有效 ODE 的比较实验"""

    def __init__(self):
        super().__init__("compare")
        self.effective = EffectiveExperiment()
        self.simulate = SimulateExperiment()

    def write_report(self, experiment: ExperimentConfig, report: ComparisonReport, directory: Path):
        rows = [(t, d, p, w, p - w) for t, d, p, w in zip(report.times, report.deviation, report.phi, report.W)]
        self.output.write_csv(directory / 'comparison.csv', ['t', 'deviation', 'phi', 'W', 'energy_gap'],
                              rows, experiment.hash)
        if report.xi_gl.shape[1]:
            dimension = report.xi_gl.shape[1]
            xi_rows = [(t, *gl, *eff) for t, gl, eff in zip(report.times, report.xi_gl, report.xi_eff)]
            self.output.write_csv(directory / 'comparison_xi.csv',
                                  ['t'] + [f"xi_gl_{m}" for m in range(dimension)]
                                  + [f"xi_eff_{m}" for m in range(dimension)], xi_rows, experiment.hash)
        self.output.write_json(directory / 'comparison.json', report.to_dict(), experiment.hash)

    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        out_dir = Path(out_dir)
        geom = self.build_surface(experiment)
        self.validate_vortices(experiment, geom)
        ctx = self.context(experiment, geom)
        gamma = self.gamma(experiment)

        _, effective = self.effective.integrate(experiment, ctx)
        self.effective.write_trajectory(experiment, ctx, effective, out_dir / 'effective')

        results = self.simulate.sweep(experiment, out_dir, jobs=jobs, ctx=ctx if jobs <= 1 else None)
        self.simulate.write_sweep(experiment, [summary for summary, _ in results], out_dir)

        rows = []
        reports = []
        for (_, trajectory) in results:
            report = compare(geom, trajectory, effective, gamma)
            self.write_report(experiment, report, epsilon_dir(out_dir, trajectory.epsilon))
            reports.append(report)
            rows.append((report.epsilon, abs(np.log(report.epsilon)), report.max_deviation, report.xi_difference,
                         float(report.energy_gap.min()), report.inequality_holds, int(report.times.size),
                         len(report.gaps)))
        self.output.write_csv(out_dir / 'deviation.csv',
                              ['epsilon', 'log_eps', 'max_deviation', 'xi_difference', 'min_energy_gap',
                               'inequality_holds', 'samples', 'tracking_gaps'], rows, experiment.hash)

        deviations = [r.max_deviation for r in reports]
        monotone = all(a > b for a, b in zip(deviations, deviations[1:]))
        if len(deviations) > 1 and not monotone:
            logger.warning(f"偏差没有随 ε 严格减小: {deviations}")
        return {'experiment': experiment.name, 'epsilons': len(reports), 'deviation_decreasing': monotone,
                'inequality_holds': all(r.inequality_holds for r in reports),
                'max_deviation': max(deviations) if deviations else 0.0, 'config_hash': experiment.hash}
