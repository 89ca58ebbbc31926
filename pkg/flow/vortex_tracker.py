"""
涡旋检测 - 从面涡度 ω(u) 中聚类出涡核，给出位置与整数度数
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

import config
from fields.connection import Connection
from fields.tangent import TangentField, vorticity
from logger_config import setup_logger
from surface.base import SurfacePoint

logger = setup_logger(__name__)


@dataclass
class TrackedVortex:
    """一个检测到的涡核"""

    point: SurfacePoint
    degree: int
    charge: float          # Σω / 2π（取整前）
    faces: np.ndarray      # 聚类包含的面片

    @property
    def defect(self) -> float:
        """取整缺陷"""
        return abs(self.charge - self.degree)

    @property
    def position(self) -> np.ndarray:
        return self.point.position

    def to_record(self) -> dict:
        return {'point': self.point.to_record(), 'degree': self.degree, 'charge': self.charge,
                'defect': self.defect, 'faces': int(self.faces.size)}


def _grow(adjacency, mask: np.ndarray, rings: int) -> np.ndarray:
    for _ in range(rings):
        mask = mask | (adjacency @ mask.astype(float) > 0)
    return mask


def _merge_close(centroids: np.ndarray, radius: float) -> np.ndarray:
    """质心距离小于 radius 的聚类合并，返回每个聚类的新标签"""
    n = centroids.shape[0]
    labels = np.arange(n)
    if n < 2:
        return labels
    gaps = np.linalg.norm(centroids[:, None] - centroids[None], axis=2)
    close = (gaps < radius).astype(float)
    _, labels = connected_components(close, directed=False)
    return labels


def track_vortices(u: TangentField, conn: Connection,
                   params: Optional[Dict[str, Any]] = None) -> List[TrackedVortex]:
    """
    检测涡旋
    1. |ω| ≥ max(mass_fraction·max|ω|, mass_floor) 的面片按面邻接取连通分量
    2. 每个分量外扩 grow_rings 环，重叠或质心相距小于 merge_radius_cells 个单元的分量合并
    3. 度数 = round(Σω / 2π)，度数为 0 的聚类丢弃
    4. 位置 = |ω| 加权质心投影回曲面
    Args:
        u: 切向量场
        conn: 联络
        params: 覆盖 config.TRACKING_CONFIG
    Returns:
        TrackedVortex 列表（核未解析时缺陷较大，只告警）
    """
    params = {**config.TRACKING_CONFIG, **(params or {})}
    geom = conn.geom
    omega = vorticity(u, conn)
    peak = float(np.abs(omega).max()) if omega.size else 0.0
    threshold = max(params['mass_fraction'] * peak, params['mass_floor'])
    core = np.abs(omega) >= threshold
    if not core.any():
        return []

    adjacency = geom.face_adjacency
    sub = adjacency[core][:, core]
    n_core, core_labels = connected_components(sub, directed=False)
    core_ids = np.nonzero(core)[0]

    clusters = []
    for label in range(n_core):
        seed = np.zeros(geom.n_faces, dtype=bool)
        seed[core_ids[core_labels == label]] = True
        clusters.append(_grow(adjacency, seed, params['grow_rings']))

    # 外扩后重叠的聚类先合并
    if len(clusters) > 1:
        stacked = np.stack(clusters).astype(float)
        overlap = (stacked @ stacked.T) > 0
        _, labels = connected_components(overlap.astype(float), directed=False)
        clusters = [np.any(np.stack([c for c, lab in zip(clusters, labels) if lab == k]), axis=0)
                    for k in range(labels.max() + 1)]

    weights = np.abs(omega)
    centroids = np.array([np.average(geom.face_centers[c], axis=0, weights=weights[c] + 1e-300) for c in clusters])
    labels = _merge_close(centroids, params['merge_radius_cells'] * geom.mean_edge_length)
    if labels.max() + 1 < len(clusters):
        logger.debug(f"{len(clusters)} 个聚类合并为 {labels.max() + 1} 个")
        clusters = [np.any(np.stack([c for c, lab in zip(clusters, labels) if lab == k]), axis=0)
                    for k in range(labels.max() + 1)]

    vortices = []
    for mask in clusters:
        faces = np.nonzero(mask)[0]
        charge = float(omega[faces].sum() / (2.0 * np.pi))
        degree = int(np.rint(charge))
        if degree == 0:
            continue
        centroid = np.average(geom.face_centers[faces], axis=0, weights=weights[faces] + 1e-300)
        vortex = TrackedVortex(point=geom.make_point(centroid), degree=degree, charge=charge, faces=faces)
        if vortex.defect > params['defect_warning']:
            logger.warning(f"涡核未解析: Σω/2π = {charge:.3f}，取整为 {degree}")
        vortices.append(vortex)
    return vortices


def degree_sum(vortices: List[TrackedVortex]) -> int:
    return int(sum(v.degree for v in vortices))
