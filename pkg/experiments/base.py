"""
实验基类 - 每个子命令一个 Experiment，共享曲面、上下文与初始构型的构造
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from errors import ConfigError
from experiments.config_loader import ExperimentConfig
from experiments.output import ExperimentOutputManager, get_output_manager
from logger_config import setup_logger
from renormalized.context import SurfaceContext
from renormalized.core_energy import core_energy
from renormalized.model import VortexConfiguration, VortexEnergyModel, point_from_record
from renormalized.psi import check_admissible
from surface.base import SurfaceGeometry, SurfacePoint
from surface.builders import load_or_build
from surface.geodesic import exp_map

logger = setup_logger(__name__)


def resolve_surface(experiment: ExperimentConfig):
    """网格路径相对于配置文件所在目录解析"""
    surface = experiment.surface
    base = Path(experiment.source).parent if experiment.source else Path('.')
    if isinstance(surface, str):
        path = Path(surface)
        return str(path if path.is_absolute() else base / path)
    if surface.get('kind') == 'mesh' and 'path' in surface:
        path = Path(surface['path'])
        return {**surface, 'path': str(path if path.is_absolute() else base / path)}
    return surface


class Experiment(ABC):
    """实验抽象基类"""

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def run(self, experiment: ExperimentConfig, out_dir: Path, jobs: int = 1) -> Dict[str, Any]:
        """
        执行实验并写出结果文件
        Args:
            experiment: 实验配置
            out_dir: 输出目录
            jobs: 并行任务数
        Returns:
            结果摘要（打印到命令行）
        """
        pass

    @property
    def output(self) -> ExperimentOutputManager:
        return get_output_manager()

    # ------------------------------------------------------------------
    # 共享构造
    # ------------------------------------------------------------------
    def build_surface(self, experiment: ExperimentConfig) -> SurfaceGeometry:
        return load_or_build(resolve_surface(experiment))

    def context(self, experiment: ExperimentConfig, geom: SurfaceGeometry) -> SurfaceContext:
        return SurfaceContext(geom, experiment.overrides('dec'))

    def energy_model(self, experiment: ExperimentConfig, ctx: SurfaceContext) -> VortexEnergyModel:
        return VortexEnergyModel(ctx, params=experiment.overrides('renormalized'), model=experiment.model)

    def gamma(self, experiment: ExperimentConfig) -> float:
        return core_energy(experiment.overrides('core')).gamma

    def initial_points(self, experiment: ExperimentConfig, geom: SurfaceGeometry) -> List[SurfacePoint]:
        """
        解析初始位置；perturbation > 0 时按 seed 沿随机切向扰动
        Raises:
            ConfigError: 没有给出涡旋
        """
        records = experiment.vortices.get('points', [])
        points = [point_from_record(geom, record) for record in records]
        if experiment.perturbation > 0:
            rng = np.random.default_rng(experiment.seed)
            radius = experiment.perturbation * geom.mean_edge_length
            moved = []
            for point in points:
                _, e1, e2 = geom.point_frame(point)
                angle = rng.uniform(0.0, 2.0 * np.pi)
                moved.append(exp_map(geom, point, radius * (np.cos(angle) * e1 + np.sin(angle) * e2), trust=0))
            points = moved
            logger.info(f"初始位置按 seed={experiment.seed} 扰动 {radius:.3e}")
        return points

    def validate_vortices(self, experiment: ExperimentConfig, geom: SurfaceGeometry):
        """在任何求解之前检查可容许性"""
        if not experiment.vortices.get('points'):
            raise ConfigError("实验缺少涡旋初始数据", diagnostic={'command': self.name})
        check_admissible(geom, self.initial_points(experiment, geom), experiment.degrees())

    def theta0(self, experiment: ExperimentConfig, geom: SurfaceGeometry) -> Optional[np.ndarray]:
        """θ⁰：None、标量或逐顶点列表"""
        theta = experiment.theta0
        if theta is None:
            return None
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0:
            return np.full(geom.n_vertices, float(theta))
        if theta.shape != (geom.n_vertices,):
            raise ConfigError("theta0 长度与顶点数不一致",
                              diagnostic={'got': int(theta.size), 'expected': geom.n_vertices})
        return theta

    def initial_configuration(self, experiment: ExperimentConfig, model: VortexEnergyModel) -> VortexConfiguration:
        """(a⁰, d, ξ⁰, θ⁰)：ξ⁰ 由 integers 或 xi 给定，都省略时取最近整数"""
        geom = model.geom
        vortices = experiment.vortices
        xi = vortices.get('xi')
        return model.configuration(self.initial_points(experiment, geom), experiment.degrees(),
                                   integers=vortices.get('integers'),
                                   xi=None if xi is None else np.asarray(xi, dtype=float),
                                   theta=self.theta0(experiment, geom))
