"""
实验管理器 - 统一管理所有子命令
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from errors import ConfigError, GLVortexError
from experiments.base import Experiment
from experiments.compare import CompareExperiment
from experiments.config_loader import ExperimentConfig
from experiments.effective import EffectiveExperiment
from experiments.energy import EnergyLandscapeExperiment
from experiments.info import InfoExperiment
from experiments.output import configure_output
from experiments.simulate import SimulateExperiment
from logger_config import setup_logger

logger = setup_logger(__name__)


class ExperimentManager:
    """实验管理器，负责按子命令名分派实验"""

    def __init__(self):
        self.experiments: List[Experiment] = []
        self.setup_default_experiments()

    def setup_default_experiments(self):
        """注册默认子命令"""
        self.add_experiment(InfoExperiment())
        self.add_experiment(SimulateExperiment())
        self.add_experiment(EffectiveExperiment())
        self.add_experiment(CompareExperiment())
        self.add_experiment(EnergyLandscapeExperiment())

    def add_experiment(self, experiment: Experiment):
        """添加新的子命令"""
        self.experiments.append(experiment)

    def get_experiment_by_name(self, name: str) -> Optional[Experiment]:
        """根据名称获取子命令"""
        for experiment in self.experiments:
            if experiment.name == name:
                return experiment
        return None

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.experiments]

    def run(self, name: str, experiment_config: ExperimentConfig, out_dir: Optional[Path] = None,
            jobs: int = 1) -> Dict[str, Any]:
        """
        执行子命令并打印结果摘要
        Args:
            name: 子命令名
            experiment_config: 实验配置
            out_dir: 输出目录（默认取 output.out_dir）
            jobs: 并行任务数
        Raises:
            GLVortexError: 任一模块的错误原样向上传递
        """
        experiment = self.get_experiment_by_name(name)
        if experiment is None:
            raise ConfigError(f"未知子命令: {name}", diagnostic={'available': self.names})
        if jobs < 1:
            raise ConfigError("--jobs 至少为 1", diagnostic={'jobs': jobs})
        output_section = experiment_config.section('output')
        output = configure_output(output_section)
        out_dir = Path(out_dir if out_dir is not None else output_section['out_dir'])
        logger.info(f"运行 {name}: {experiment_config.name} → {out_dir}")
        try:
            summary = experiment.run(experiment_config, out_dir, jobs=jobs)
        except GLVortexError as e:
            logger.error(f"{name} 失败 [{e.module}]: {e.message}")
            raise
        output.output_result(name, summary)
        logger.info(f"{name} 完成，写出 {len(output.written)} 个文件")
        return summary
