"""
周期约束 - ξ ∈ ℒ(a, d)：沿同调圈 γ_h 的相位增量必须是 2π 的整数倍

沿闭合边链积分相位时，顶点相位的增量是 j − r（r 为标架旋转角），因此条件为
    ∮_γ (J + ξ) − A_γ ∈ 2πZ
其中 J 是 d*Ψ 闭合后的离散 1-形式，A_γ 是标架沿环路的旋转角之和。
J 在每个面上满足 d1 J + Ω = 2π·(面内度数)，周期与环路的选取无关（模 2π 整数）。
整数周期向量在初始化时算一次，此后保持不变。
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from dec.homology import HomologyLoops, homology_generators
from errors import HomologyError
from logger_config import setup_logger
from renormalized.context import SurfaceContext
from renormalized.psi import PsiSolution, solve_psi
from surface.base import SurfacePoint

logger = setup_logger(__name__)


@dataclass
class PeriodConstraint:
    """
    Π c = 2πk − ∮J + A 的仿射条件
    matrix[h, m] = ∮_{γ_h} ζ_m
    """

    loops: HomologyLoops
    matrix: np.ndarray
    psi_periods: np.ndarray      # ∮_{γ_h} J
    frame_periods: np.ndarray    # A_h
    integers: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def raw_periods(self, coefficients: np.ndarray) -> np.ndarray:
        """(∮(J + ξ) − A) / 2π"""
        if self.dimension == 0:
            return np.zeros(0)
        xi_periods = self.matrix @ np.asarray(coefficients, dtype=float)
        return (self.psi_periods + xi_periods - self.frame_periods) / (2.0 * np.pi)

    def nearest_integers(self, coefficients: np.ndarray) -> np.ndarray:
        return np.rint(self.raw_periods(coefficients)).astype(np.int64)

    def defect(self, coefficients: np.ndarray) -> np.ndarray:
        """相对于固定整数（未设定时取最近整数）的周期缺陷"""
        raw = self.raw_periods(coefficients)
        target = self.integers if self.integers is not None else np.rint(raw)
        return raw - target

    def solve(self, integers: Sequence[int]) -> np.ndarray:
        """给定整数周期求唯一的 ξ 系数"""
        if self.dimension == 0:
            return np.zeros(0)
        integers = np.asarray(integers, dtype=float)
        rhs = 2.0 * np.pi * integers - self.psi_periods + self.frame_periods
        return np.linalg.solve(self.matrix, rhs)


def excluded_vertices(ctx: SurfaceContext, points: List[SurfacePoint], rings: Optional[int] = None) -> np.ndarray:
    """同调圈需要避开的顶点：涡旋所在面片外扩若干环"""
    rings = config.RENORMALIZED_CONFIG['clearance_rings'] if rings is None else rings
    return ctx.neighborhood(points, rings)


def period_constraint(ctx: SurfaceContext, points: List[SurfacePoint], degrees: Sequence[int],
                      psi: Optional[PsiSolution] = None, avoid: Optional[List[SurfacePoint]] = None,
                      params: Optional[Dict[str, Any]] = None) -> PeriodConstraint:
    """
    构造 (a, d) 处的周期约束（整数未设定）
    Args:
        ctx: 曲面上下文
        points: 涡旋位置
        degrees: 度数
        psi: 已求好的 Ψ（省略时重新求解）
        avoid: 环路额外需要避开的点（默认为 points 本身）
        params: 覆盖 config.RENORMALIZED_CONFIG
    Raises:
        HomologyError: 周期矩阵奇异
    """
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    if ctx.harmonic_dimension == 0:
        return PeriodConstraint(loops=HomologyLoops(), matrix=np.zeros((0, 0)),
                                psi_periods=np.zeros(0), frame_periods=np.zeros(0))
    psi = solve_psi(ctx, points, degrees) if psi is None else psi
    avoid = list(points) if avoid is None else list(avoid)
    excluded = excluded_vertices(ctx, avoid, params['clearance_rings'])
    loops = homology_generators(ctx.geom, excluded=excluded) if excluded.size else ctx.loops

    matrix = np.stack([loops.integrate(zeta) for zeta in ctx.basis.forms], axis=1)
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > 1e12:
        raise HomologyError("周期矩阵奇异", diagnostic={'condition': float(cond)})
    return PeriodConstraint(loops=loops, matrix=matrix, psi_periods=loops.integrate(psi.form),
                            frame_periods=loops.integrate(ctx.conn.angles))


def admissible_xi(ctx: SurfaceContext, points: List[SurfacePoint], degrees: Sequence[int],
                  integers: Optional[Sequence[int]] = None, hint: Optional[np.ndarray] = None,
                  params: Optional[Dict[str, Any]] = None):
    """
    选取 ℒ(a, d) 中的 ξ
    Args:
        integers: 指定整数周期；省略时取离 hint（默认 ξ = 0）最近的整数
        hint: 参考系数
    Returns:
        (系数, 带整数的 PeriodConstraint)
    """
    constraint = period_constraint(ctx, points, degrees, params=params)
    if constraint.dimension == 0:
        constraint.integers = np.zeros(0, dtype=np.int64)
        return np.zeros(0), constraint
    if integers is None:
        hint = np.zeros(constraint.dimension) if hint is None else np.asarray(hint, dtype=float)
        integers = constraint.nearest_integers(hint)
    constraint.integers = np.asarray(integers, dtype=np.int64)
    return constraint.solve(constraint.integers), constraint


def xi_update(ctx: SurfaceContext, points_prev: List[SurfacePoint], degrees: Sequence[int],
              xi_prev: np.ndarray, points_new: List[SurfacePoint],
              params: Optional[Dict[str, Any]] = None) -> np.ndarray:
    """
    涡旋从 a_prev 移到 a_new 时保持周期整数不变，求新的 ξ
    环路同时避开新旧位置，整数在旧构型上读出
    """
    if ctx.harmonic_dimension == 0:
        return np.zeros(0)
    avoid = list(points_prev) + list(points_new)
    before = period_constraint(ctx, points_prev, degrees, avoid=avoid, params=params)
    integers = before.nearest_integers(xi_prev)
    defect = np.abs(before.defect(xi_prev)).max()
    tol = {**config.RENORMALIZED_CONFIG, **(params or {})}['period_tol']
    if defect > tol:
        logger.warning(f"旧构型的周期缺陷 {defect:.2e} 超过容差，按最近整数继续")
    after = period_constraint(ctx, points_new, degrees, avoid=avoid, params=params)
    xi_new = after.solve(integers)
    logger.debug(f"ξ 更新: 整数 {integers.tolist()}，|Δξ| = {np.linalg.norm(xi_new - xi_prev):.3e}")
    return xi_new
