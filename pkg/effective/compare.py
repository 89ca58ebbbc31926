"""
GL 流与有效动力学的比较 - 涡旋偏差、调和通量与能量不等式 φ(t) ≥ W(t)
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from effective.dynamics import EffectiveTrajectory
from errors import EffectiveDynamicsError
from flow.trajectory import FlowTrajectory, excess_energy, flux_series
from logger_config import setup_logger
from surface.base import SurfaceGeometry, SurfacePoint
from surface.geodesic import pairwise_distances

logger = setup_logger(__name__)


@dataclass
class ComparisonReport:
    """比较结果"""

    times: np.ndarray
    deviation: np.ndarray             # 每个匹配采样的 Σ_j dist(a_j^GL, a_j^eff)
    phi: np.ndarray                   # F_ε − πn|log ε| − nγ
    W: np.ndarray                     # 有效动力学 W(t)（插值到 GL 采样时间）
    xi_gl: np.ndarray
    xi_eff: np.ndarray
    gaps: List[float] = field(default_factory=list)    # 追踪失败的采样时间
    tolerance: float = 0.0
    epsilon: float = 0.0

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max()) if self.deviation.size else 0.0

    @property
    def xi_difference(self) -> float:
        if self.xi_gl.size == 0:
            return 0.0
        return float(np.abs(self.xi_gl - self.xi_eff).max())

    @property
    def energy_gap(self) -> np.ndarray:
        return self.phi - self.W

    @property
    def inequality_holds(self) -> bool:
        """φ(t) ≥ W(t) − tolerance 在所有匹配采样上成立"""
        return bool(np.all(self.energy_gap >= -self.tolerance)) if self.phi.size else True

    def to_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'samples': int(self.times.size),
            'max_deviation': self.max_deviation,
            'xi_difference': self.xi_difference,
            'initial_energy_gap': float(self.energy_gap[0]) if self.phi.size else None,
            'min_energy_gap': float(self.energy_gap.min()) if self.phi.size else None,
            'inequality_holds': self.inequality_holds,
            'tolerance': self.tolerance,
            'tracking_gaps': len(self.gaps),
        }


def match_vortices(geom: SurfaceGeometry, first: List[SurfacePoint], second: List[SurfacePoint],
                   first_degrees: Sequence[int], second_degrees: Sequence[int]) -> Tuple[np.ndarray, float]:
    """
    测地距离上的匈牙利匹配，只允许同度数配对
    Returns:
        (second 中与 first 各点匹配的下标, 匹配距离之和)
    Raises:
        EffectiveDynamicsError: 数目或度数多重集不一致
    """
    if len(first) != len(second) or sorted(first_degrees) != sorted(second_degrees):
        raise EffectiveDynamicsError("两条轨迹的涡旋度数不一致",
                                     diagnostic={'first': list(map(int, first_degrees)),
                                                 'second': list(map(int, second_degrees))})
    if not first:
        return np.zeros(0, dtype=np.int64), 0.0
    cost = pairwise_distances(geom, first, second)
    mismatch = np.asarray(first_degrees)[:, None] != np.asarray(second_degrees)[None, :]
    cost = np.where(mismatch, 1e12, cost)
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(first), dtype=np.int64)
    order[rows] = cols
    return order, float(cost[rows, cols].sum())


def _interpolated_points(geom: SurfaceGeometry, eff: EffectiveTrajectory, t: float) -> List[SurfacePoint]:
    times = eff.times
    if len(times) == 1 or t <= times[0]:
        return list(eff.states[0].configuration.points)
    if t >= times[-1]:
        return list(eff.states[-1].configuration.points)
    k = int(np.searchsorted(times, t))
    w = (t - times[k - 1]) / (times[k] - times[k - 1])
    before = eff.states[k - 1].configuration.positions()
    after = eff.states[k].configuration.positions()
    return [geom.make_point(p) for p in (1 - w) * before + w * after]


def _interp_rows(times: np.ndarray, values: np.ndarray, t: np.ndarray) -> np.ndarray:
    if values.ndim == 1:
        return np.interp(t, times, values)
    if values.shape[1] == 0:
        return np.zeros((t.size, 0))
    return np.stack([np.interp(t, times, values[:, m]) for m in range(values.shape[1])], axis=1)


def compare(geom: SurfaceGeometry, gl: FlowTrajectory, eff: EffectiveTrajectory, gamma: float,
            energy_fraction: float = 0.05) -> ComparisonReport:
    """
    比较两条轨迹（GL 流使用加速时钟）
    Args:
        geom: 曲面
        gl: GL 流轨迹
        eff: 有效动力学轨迹
        gamma: 核能量
        energy_fraction: φ ≥ W 检验的容差（W 动态范围的比例）
    Raises:
        EffectiveDynamicsError: 初始度数不一致或没有可比较的采样
    """
    if not gl.samples or not eff.states:
        raise EffectiveDynamicsError("轨迹为空，无法比较")
    degrees_eff = eff.states[0].configuration.degrees
    horizon = min(gl.t_star if gl.t_star is not None else np.inf, eff.times[-1])

    times, deviation, gaps, kept = [], [], [], []
    for index, sample in enumerate(gl.samples):
        if sample.t > horizon + 1e-12:
            break
        points_gl = [v.point for v in sample.vortices]
        degrees_gl = [v.degree for v in sample.vortices]
        if index == 0:
            # 初始度数必须一致，否则直接报错
            match_vortices(geom, points_gl, list(eff.states[0].configuration.points), degrees_gl, degrees_eff)
        try:
            _, total = match_vortices(geom, points_gl, _interpolated_points(geom, eff, sample.t),
                                      degrees_gl, degrees_eff)
        except EffectiveDynamicsError:
            gaps.append(sample.t)
            continue
        times.append(sample.t)
        deviation.append(total)
        kept.append(index)
    if not times:
        raise EffectiveDynamicsError("没有可比较的采样（全部追踪失败）", diagnostic={'gaps': gaps})

    times = np.asarray(times)
    n = len(degrees_eff)
    phi = excess_energy(gl, gamma, n=n)[kept]
    w_curve = _interp_rows(eff.times, eff.energies, times)
    xi_gl = flux_series(gl)[kept] if gl.samples[0].flux.size else np.zeros((times.size, 0))
    xi_eff = _interp_rows(eff.times, eff.xi_series(), times)
    spread = float(np.ptp(eff.energies)) if len(eff) > 1 else 0.0
    tolerance = energy_fraction * max(spread, abs(float(eff.energies[0])) * 1e-3, 1e-12)
    report = ComparisonReport(times=times, deviation=np.asarray(deviation), phi=phi, W=w_curve,
                              xi_gl=xi_gl, xi_eff=xi_eff, gaps=gaps, tolerance=tolerance, epsilon=gl.epsilon)
    logger.info(f"比较完成 ε={gl.epsilon}: 最大偏差 {report.max_deviation:.4e}，"
                f"φ ≥ W {'成立' if report.inequality_holds else '不成立'}")
    return report
