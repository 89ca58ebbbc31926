"""
内在重整化能量 W^intr - 挖去半径 ρ 的小圆盘后的 Dirichlet 能减去 πΣd²|log ρ|，再外推 ρ → 0
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from errors import RenormalizedEnergyError, SeparationError
from logger_config import setup_logger
from renormalized.canonical import CanonicalField
from renormalized.context import SurfaceContext
from surface.base import SurfacePoint

logger = setup_logger(__name__)


@dataclass
class IntrinsicValue:
    """W^intr 及其外推表"""

    value: float
    error: float
    radii: np.ndarray
    table: np.ndarray            # 各 ρ 处的截断值

    def to_dict(self) -> dict:
        return {'value': self.value, 'error': self.error,
                'radii': self.radii.tolist(), 'table': self.table.tolist()}


def sublevel_fraction(values: np.ndarray, level: float) -> np.ndarray:
    """
    三角形上线性函数 {Σλ_k v_k < level} 所占面积比例
    Args:
        values: (F, 3) 三个顶点处的函数值
    """
    v = np.sort(values, axis=1)
    v0, v1, v2 = v[:, 0], v[:, 1], v[:, 2]
    frac = np.zeros(v.shape[0])
    frac[level >= v2] = 1.0
    span02 = np.maximum(v2 - v0, 1e-300)
    low = (level > v0) & (level <= v1)
    frac[low] = (level - v0[low]) ** 2 / (span02[low] * np.maximum(v1[low] - v0[low], 1e-300))
    high = (level > v1) & (level < v2)
    frac[high] = 1.0 - (v2[high] - level) ** 2 / (span02[high] * np.maximum(v2[high] - v1[high], 1e-300))
    return np.clip(frac, 0.0, 1.0)


def cut_energy(ctx: SurfaceContext, face_current: np.ndarray, points: List[SurfacePoint],
               degrees: Sequence[int], rho: float) -> float:
    """
    ½∫_{M∖∪B_ρ(a_j)} |j|² − πΣd²|log ρ|
    圆盘用到 a_j 的弦距离界定，逐面密度为常数
    """
    geom = ctx.geom
    density = np.einsum('fd,fd->f', face_current, face_current)
    inside = np.zeros(geom.n_faces)
    for point in points:
        dist = np.linalg.norm(geom.vertices - point.position, axis=1)
        inside += sublevel_fraction(dist[geom.faces], rho)
    outside = np.clip(1.0 - inside, 0.0, 1.0)
    energy = 0.5 * np.dot(geom.face_areas * outside, density)
    d2 = float(np.sum(np.asarray(degrees, dtype=float) ** 2))
    return float(energy - np.pi * d2 * abs(np.log(rho)))


def min_chord_separation(points: List[SurfacePoint]) -> float:
    if len(points) < 2:
        return np.inf
    positions = np.array([p.position for p in points])
    gaps = np.linalg.norm(positions[:, None] - positions[None], axis=2)
    gaps[np.diag_indices(len(points))] = np.inf
    return float(gaps.min())


def feasible_separation(cell: float, params: Optional[Dict[str, Any]] = None) -> float:
    """最小的 ρ₀/4 仍不小于一个网格单元的涡旋间距"""
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    return 4.0 * cell / params['disk_fraction']


def w_intrinsic(ctx: SurfaceContext, canonical: CanonicalField,
                params: Optional[Dict[str, Any]] = None) -> IntrinsicValue:
    """
    W^intr(a, d, ξ)
    在 ρ ∈ {ρ₀, ρ₀/2, ρ₀/4} 上取值，按误差模型 W + Aρ² + B(h/ρ)² 外推
    （前一项是连续问题的截断误差，后一项是圆盘附近的离散误差）
    Raises:
        SeparationError: 涡旋间距过小，ρ₀/4 小于一个网格单元
        RenormalizedEnergyError: rho_cells 过小，ρ₀/4 小于一个网格单元
    """
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    h = ctx.cell
    points, degrees = canonical.points, canonical.degrees
    if not points:
        energy = 0.5 * np.dot(ctx.geom.face_areas, np.einsum('fd,fd->f', canonical.face_current,
                                                               canonical.face_current))
        return IntrinsicValue(value=float(energy), error=0.0, radii=np.zeros(0), table=np.zeros(0))

    separation = min_chord_separation(points)
    rho0 = min(params['rho_cells'] * h, params['disk_fraction'] * separation)
    radii = rho0 / np.array([1.0, 2.0, 4.0])
    if radii[-1] < h:
        diagnostic = {'rho_min': float(radii[-1]), 'cell': h, 'separation': separation}
        if separation < feasible_separation(h, params):
            raise SeparationError("涡旋间距过小，截断半径小于网格分辨率", diagnostic=diagnostic)
        raise RenormalizedEnergyError("截断半径小于网格分辨率", diagnostic=diagnostic)
    table = np.array([cut_energy(ctx, canonical.face_current, points, degrees, rho) for rho in radii])

    s = radii / rho0
    design = np.stack([np.ones(3), s ** 2, 1.0 / s ** 2], axis=1)
    fit = np.linalg.solve(design, table)
    value = float(fit[0])
    # 只含 ρ² 项的两点外推作为误差参照
    richardson = (4.0 * table[1] - table[0]) / 3.0
    error = float(abs(value - richardson))
    logger.debug(f"W^intr 外推: 表 {np.round(table, 6).tolist()} → {value:.6f} (±{error:.1e})")
    return IntrinsicValue(value=value, error=error, radii=radii, table=table)
