"""
典范调和场 u*[a, d, ξ] - 单位场，j(u*) = d*Ψ + ξ，且 u*(b⁰) = w⁰

构造步骤：
1. 目标电流 J + ξ（J 来自 Ψ 的逐面向量，ξ 来自调和基）
2. J 已含最小范数修正 y（随 Ψ 一同求出），每个面上 d(J + ξ) + Ω 恰为 2π·(面内涡旋度数)
3. 从 b⁰ 出发沿 BFS 树积分相位
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, dijkstra

import config
from errors import FieldError, PeriodDefectError
from fields.tangent import TangentField, current_j
from logger_config import setup_logger
from renormalized.constraint import PeriodConstraint, period_constraint
from renormalized.context import SurfaceContext
from renormalized.psi import PsiSolution, psi_current, solve_psi
from surface.base import SurfacePoint

logger = setup_logger(__name__)


@dataclass
class CanonicalField:
    """典范调和场及其构造数据"""

    field: TangentField
    points: List[SurfacePoint]
    degrees: np.ndarray
    xi: np.ndarray
    b0: int
    w0: complex
    psi: PsiSolution
    face_current: np.ndarray      # (F, 3) d*Ψ + ξ 的逐面向量
    target: np.ndarray            # J + ξ + y（边）
    correction: np.ndarray        # y
    constraint: PeriodConstraint
    period_defect: np.ndarray
    vortex_faces: np.ndarray
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def rotated(self, angle: float) -> "CanonicalField":
        """整体旋转 e^{iκ}u*"""
        rotated = self.field.rotate(angle)
        return CanonicalField(field=rotated, points=self.points, degrees=self.degrees, xi=self.xi, b0=self.b0,
                              w0=complex(np.exp(1j * angle) * self.w0), psi=self.psi,
                              face_current=self.face_current, target=self.target, correction=self.correction,
                              constraint=self.constraint, period_defect=self.period_defect,
                              vortex_faces=self.vortex_faces, diagnostics=dict(self.diagnostics))


def farthest_vertex(ctx: SurfaceContext, points: Sequence[SurfacePoint]) -> int:
    """离所有涡旋最远的顶点（沿边图距离）"""
    if not points:
        return 0
    seeds = ctx.point_vertices(points)
    dist = dijkstra(ctx.geom.vertex_adjacency, indices=seeds, min_only=True)
    return int(np.argmax(dist))


def _integrate_phase(ctx: SurfaceContext, target: np.ndarray, b0: int, phase0: float) -> np.ndarray:
    """沿 BFS 树积分：φ_child = φ_parent + j(parent→child) − r(parent→child)"""
    geom = ctx.geom
    order, pred = breadth_first_order(geom.vertex_adjacency, b0, directed=False, return_predecessors=True)
    lookup = sp.csr_matrix((np.arange(geom.n_edges) + 1.0,
                            (geom.edges[:, 0], geom.edges[:, 1])), shape=(geom.n_vertices, geom.n_vertices))
    children = order[1:]
    parents = pred[children]
    low, high = np.minimum(parents, children), np.maximum(parents, children)
    ids = np.asarray(lookup[low, high]).ravel().astype(np.int64) - 1
    signs = np.where(parents < children, 1.0, -1.0)
    increments = signs * (target[ids] - ctx.conn.angles[ids])
    phase = np.zeros(geom.n_vertices)
    phase[b0] = phase0
    for child, parent, inc in zip(children, parents, increments):
        phase[child] = phase[parent] + inc
    return phase


def canonical_field(ctx: SurfaceContext, points: List[SurfacePoint], degrees: Sequence[int], xi: np.ndarray,
                    b0: Optional[int] = None, w0: complex = 1.0 + 0.0j,
                    params: Optional[Dict[str, Any]] = None,
                    psi: Optional[PsiSolution] = None) -> CanonicalField:
    """
    构造典范调和场
    Args:
        ctx: 曲面上下文
        points: 涡旋位置 a
        degrees: 度数 d
        xi: 调和系数（长度 2𝔤）
        b0: 归一化顶点（默认离涡旋最远的顶点）
        w0: b0 标架下的单位复数
        params: 覆盖 config.RENORMALIZED_CONFIG
        psi: 已求好的 Ψ
    Raises:
        PeriodDefectError: ξ ∉ ℒ(a, d)
    """
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    geom = ctx.geom
    degrees = np.asarray(degrees, dtype=np.int64)
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.size != ctx.harmonic_dimension:
        raise FieldError("调和系数长度应为 2𝔤", diagnostic={'got': int(xi.size), 'expected': ctx.harmonic_dimension})
    if abs(abs(w0) - 1.0) > 1e-12:
        if abs(w0) == 0:
            raise FieldError("归一化值 w⁰ 不能为零")
        w0 = w0 / abs(w0)
    psi = solve_psi(ctx, points, degrees) if psi is None else psi

    constraint = period_constraint(ctx, points, degrees, psi=psi, params=params)
    defect = constraint.defect(xi)
    if defect.size and np.abs(defect).max() > params['period_tol']:
        raise PeriodDefectError("ξ 不满足周期约束，典范场不存在", diagnostic={'defect': defect})
    constraint.integers = constraint.nearest_integers(xi)

    psi_vectors = psi_current(ctx, psi)
    face_current = psi_vectors + ctx.harmonic_face_vectors(xi)
    # 调和部分直接用边上的精确形式，保证 d1 ξ = 0
    target = psi.form + ctx.basis.combine(xi)
    y = psi.correction

    vortex_faces = np.array([int(p.face) for p in points], dtype=np.int64)
    quanta = np.zeros(geom.n_faces)
    np.add.at(quanta, vortex_faces, degrees.astype(float))

    if b0 is None:
        b0 = farthest_vertex(ctx, points)
    phase = _integrate_phase(ctx, target, int(b0), float(np.angle(w0)))
    u = TangentField(np.exp(1j * phase))

    closure = np.abs(ctx.dec.d1 @ target + ctx.conn.holonomy - 2.0 * np.pi * quanta).max()
    logger.debug(f"典范场: b0={b0}，闭合缺陷 {closure:.2e}，|y|∞ = {np.abs(y).max():.3e}")
    return CanonicalField(field=u, points=list(points), degrees=degrees, xi=xi, b0=int(b0), w0=complex(w0),
                          psi=psi, face_current=face_current, target=target, correction=y,
                          constraint=constraint, period_defect=defect, vortex_faces=vortex_faces,
                          diagnostics={'closure': float(closure)})


def current_residual(ctx: SurfaceContext, canonical: CanonicalField, rings: int = 1) -> float:
    """
    涡旋邻域外 j(u*) 与 d*Ψ + ξ 的相对 L² 偏差（star1 加权）
    Args:
        rings: 排除的涡旋邻域环数
    """
    geom = ctx.geom
    j, _ = current_j(canonical.field, ctx.conn)
    reference = canonical.target - canonical.correction
    near = ctx.vertex_rings(ctx.point_vertices(canonical.points), rings) if canonical.points else \
        np.zeros(geom.n_vertices, dtype=bool)
    keep = ~(near[geom.edges[:, 0]] | near[geom.edges[:, 1]])
    w = np.abs(ctx.dec.star1[keep])
    diff = np.sqrt(np.dot(w, (j[keep] - reference[keep]) ** 2))
    scale = np.sqrt(np.dot(w, reference[keep] ** 2))
    return float(diff / max(scale, 1e-300))
