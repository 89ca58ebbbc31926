"""
Ψ[a, d] 求解 - −ΔΨ = 2π Σ d_k δ_{a_k} − κ vol_g
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from errors import AdmissibilityError
from logger_config import setup_logger
from renormalized.context import SurfaceContext
from surface.base import SurfaceGeometry, SurfacePoint

logger = setup_logger(__name__)


@dataclass
class PsiSolution:
    """
    Ψ = ψ vol_g，ψ 存于顶点且面积加权均值为零
    form 是 d*Ψ 在边上的闭合版本：每个面上 d1 form + Ω = 2π·(面内涡旋度数)，
    因此同伦环路上的周期只差 2π 的整数倍
    """

    psi: np.ndarray
    rhs: np.ndarray          # 对偶胞积分形式的右端项
    residual: float
    form: np.ndarray         # 闭合后的边 1-形式 J
    correction: np.ndarray   # form − (逐面向量的边平均)


def check_admissible(geom: SurfaceGeometry, points: Sequence[SurfacePoint], degrees: Sequence[int]):
    """
    (a, d) ∈ 𝒜ⁿ：度数和等于 χ(M)，涡旋两两不重合
    Raises:
        AdmissibilityError
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if len(points) != degrees.size:
        raise AdmissibilityError("涡旋数量与度数数量不一致",
                                 diagnostic={'points': len(points), 'degrees': int(degrees.size)})
    chi = geom.euler_characteristic()
    if int(degrees.sum()) != chi:
        raise AdmissibilityError("度数和不等于欧拉示性数",
                                 diagnostic={'degree_sum': int(degrees.sum()), 'euler_characteristic': chi})
    if len(points) > 1:
        positions = np.array([p.position for p in points])
        gaps = np.linalg.norm(positions[:, None] - positions[None], axis=2)
        gaps[np.diag_indices(len(points))] = np.inf
        if gaps.min() <= 1e-12 * max(geom.mean_edge_length, 1.0):
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            raise AdmissibilityError("涡旋位置重合", diagnostic={'pair': [int(i), int(j)]})


def delta_masses(geom: SurfaceGeometry, points: Sequence[SurfacePoint], degrees: Sequence[int]) -> np.ndarray:
    """2π Σ d_k δ_{a_k}：按重心坐标把质量分到所在面片的三个顶点"""
    masses = np.zeros(geom.n_vertices)
    for point, d in zip(points, degrees):
        np.add.at(masses, geom.faces[point.face], 2.0 * np.pi * int(d) * point.bary)
    return masses


def solve_psi(ctx: SurfaceContext, points: List[SurfacePoint], degrees: Sequence[int]) -> PsiSolution:
    """
    求解 Ψ[a, d]
    Args:
        ctx: 曲面上下文
        points: 涡旋位置
        degrees: 整数度数
    Returns:
        PsiSolution
    Raises:
        AdmissibilityError: 度数和不等于 χ(M)（右端项不相容）
    """
    geom = ctx.geom
    check_admissible(geom, points, degrees)
    rhs = delta_masses(geom, points, degrees) - geom.angle_defects
    psi = ctx.dec.poisson_solve_0form(rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    residual = float(np.linalg.norm(ctx.dec.stiffness @ psi - rhs) / scale)

    quanta = np.zeros(geom.n_faces)
    np.add.at(quanta, np.array([int(p.face) for p in points], dtype=np.int64), np.asarray(degrees, dtype=float))
    smooth = ctx.edge_form(face_current(ctx, psi))
    correction = ctx.closing_correction(2.0 * np.pi * quanta - ctx.conn.holonomy - ctx.dec.d1 @ smooth)
    logger.debug(f"Ψ 求解相对残差 {residual:.2e}，闭合修正 |y|∞ = {np.abs(correction).max(initial=0.0):.3e}")
    return PsiSolution(psi=psi, rhs=rhs, residual=residual, form=smooth + correction, correction=correction)


def face_current(ctx: SurfaceContext, psi: np.ndarray) -> np.ndarray:
    """d*Ψ 的逐面向量 ∇ψ × N"""
    return np.cross(ctx.dec.face_gradient(psi), ctx.geom.face_normals)


def psi_current(ctx: SurfaceContext, solution: PsiSolution) -> np.ndarray:
    return face_current(ctx, solution.psi)
