"""
离散 Levi-Civita 联络 - 边上的标架旋转角与面的和乐角
"""

from dataclasses import dataclass

import numpy as np

from logger_config import setup_logger
from surface.base import SurfaceGeometry
from surface.mesh_utils import MeshUtils

logger = setup_logger(__name__)


def connection_angles(n_i: np.ndarray, e1_i: np.ndarray, e2_i: np.ndarray,
                      n_j: np.ndarray, e1_j: np.ndarray) -> np.ndarray:
    """
    把标架 j 平移到标架 i 的旋转角 r_ij
    平移取把 N_j 转到 N_i 的最小旋转，r_ij 是 R e1_j 在标架 i 中的角度
    """
    moved = MeshUtils.rotate_between(e1_j, n_j, n_i)
    return np.arctan2(np.einsum('ij,ij->i', moved, e2_i), np.einsum('ij,ij->i', moved, e1_i))


def face_holonomy(angles: np.ndarray, face_edges: np.ndarray, face_edge_signs: np.ndarray) -> np.ndarray:
    """
    沿面边界（逆时针）平移一周的旋转角，折叠到 (-π, π]
    半边 p→q 上 r_pq = sign·angles[e]，绕行一周的和乐为 −Σ r_pq
    """
    total = (face_edge_signs * angles[face_edges]).sum(axis=1)
    return MeshUtils.wrap_angle(-total)


@dataclass
class Connection:
    """
    angles[e]：存储边 (i<j) 上把标架 j 平移到标架 i 的角度，反向为相反数
    holonomy[f]：面的曲率角 Ω_f
    """

    geom: SurfaceGeometry
    angles: np.ndarray
    holonomy: np.ndarray

    def transport_to_low(self, z_high: np.ndarray) -> np.ndarray:
        """把每条边高编号端点的复坐标平移到低编号端点的标架"""
        return np.exp(1j * self.angles) * z_high

    def total_holonomy(self) -> float:
        return float(self.holonomy.sum())


def levi_civita(geom: SurfaceGeometry) -> Connection:
    """
    由顶点法向与标架构造离散联络
    面和乐等于法向 Gauss 像三角形的有符号球面面积，总和为 2πχ
    """
    i, j = geom.edges[:, 0], geom.edges[:, 1]
    n, e1, e2 = geom.vertex_normals, geom.frame_e1, geom.frame_e2
    angles = connection_angles(n[i], e1[i], e2[i], n[j], e1[j])
    holonomy = face_holonomy(angles, geom.face_edges, geom.face_edge_signs)
    defect = holonomy.sum() - 2.0 * np.pi * geom.euler_characteristic()
    logger.debug(f"联络总和乐 − 2πχ = {defect:.3e}")
    return Connection(geom=geom, angles=angles, holonomy=holonomy)
