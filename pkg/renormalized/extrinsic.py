"""
外在泛函 𝒢(u*, θ) = ½∫|dθ|² + |𝒮(e^{iθ}u*)|² 与临界相位 θ 的求解
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

import config
from errors import ConvergenceError
from fields.tangent import TangentField
from logger_config import setup_logger
from renormalized.context import SurfaceContext

logger = setup_logger(__name__)


@dataclass
class ThetaSolution:
    """θ 求解结果"""

    theta: np.ndarray
    value: float
    residual: float
    iterations: int = 0
    newton_iterations: int = 0
    history: List[float] = field(default_factory=list)
    converged: bool = True

    def to_dict(self) -> dict:
        return {'value': self.value, 'residual': self.residual, 'iterations': self.iterations,
                'newton_iterations': self.newton_iterations, 'converged': self.converged}


def _shape_pair(ctx: SurfaceContext, z: np.ndarray, theta: np.ndarray):
    """w = e^{iθ}z 时的 𝒮w 与 𝒮(iw)，均为 (V, 2)"""
    w = np.exp(1j * theta) * z
    p = np.stack([w.real, w.imag], axis=1)
    q = np.stack([-w.imag, w.real], axis=1)
    s = ctx.geom.shape_ops
    return np.einsum('vij,vj->vi', s, p), np.einsum('vij,vj->vi', s, q)


def _values(u) -> np.ndarray:
    return u.values if hasattr(u, 'values') else np.asarray(u, dtype=complex)


def g_functional(ctx: SurfaceContext, u: TangentField, theta: np.ndarray) -> float:
    """𝒢(u, θ)"""
    theta = np.asarray(theta, dtype=float)
    sp_, _ = _shape_pair(ctx, _values(u), theta)
    dirichlet = 0.5 * theta @ (ctx.dec.stiffness @ theta)
    extrinsic = 0.5 * np.dot(ctx.geom.vertex_areas, np.einsum('vi,vi->v', sp_, sp_))
    return float(dirichlet + extrinsic)


def g_gradient(ctx: SurfaceContext, u: TangentField, theta: np.ndarray) -> np.ndarray:
    """∂𝒢/∂θ_v = (Kθ)_v + A_v (𝒮w, 𝒮iw)（积分形式）"""
    sp_, sq = _shape_pair(ctx, _values(u), theta)
    return ctx.dec.stiffness @ theta + ctx.geom.vertex_areas * np.einsum('vi,vi->v', sp_, sq)


def el_residual(ctx: SurfaceContext, u: TangentField, theta: np.ndarray) -> float:
    """欧拉-拉格朗日方程 −Δθ + (𝒮w, 𝒮iw) = 0 的离散 L² 残差"""
    g = g_gradient(ctx, u, theta)
    return float(np.sqrt(np.sum(g ** 2 / ctx.geom.vertex_areas)))


def _hessian(ctx: SurfaceContext, u: TangentField, theta: np.ndarray) -> sp.csr_matrix:
    sp_, sq = _shape_pair(ctx, _values(u), theta)
    diag = ctx.geom.vertex_areas * (np.einsum('vi,vi->v', sq, sq) - np.einsum('vi,vi->v', sp_, sp_))
    return (ctx.dec.stiffness + sp.diags(diag)).tocsr()


def theta_critical(ctx: SurfaceContext, u: TangentField, theta_init: Optional[np.ndarray] = None,
                   params: Optional[Dict[str, Any]] = None) -> ThetaSolution:
    """
    求 𝒢(u*, ·) 的临界点
    先做 Sobolev 预条件梯度下降（P = K + cM，Armijo 回溯），残差低于 newton_switch 后切换牛顿法
    Args:
        ctx: 曲面上下文
        u: 单位场 u*
        theta_init: 初值（默认 0）
        params: 覆盖 config.RENORMALIZED_CONFIG
    Raises:
        ConvergenceError: 迭代预算内残差未降到 theta_tol 以下
    """
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    geom = ctx.geom
    tol = params['theta_tol']
    theta = np.zeros(geom.n_vertices) if theta_init is None else np.array(theta_init, dtype=float)
    value = g_functional(ctx, u, theta)
    history = [value]
    residual = el_residual(ctx, u, theta)
    if residual < tol:
        return ThetaSolution(theta=theta, value=value, residual=residual, history=history)

    mass = geom.vertex_areas
    shape_norm = float(np.max(np.sum(geom.shape_ops ** 2, axis=(1, 2))))
    shift = max(shape_norm, 1.0 / geom.total_area)
    precond = splu((ctx.dec.stiffness + sp.diags(shift * mass)).tocsc())
    c1 = params['armijo_c1']

    iterations = 0
    while residual >= params['newton_switch'] and iterations < params['theta_max_iter']:
        g = g_gradient(ctx, u, theta)
        direction = -precond.solve(g)
        slope = float(g @ direction)
        step = 1.0
        for _ in range(40):
            trial = theta + step * direction
            trial_value = g_functional(ctx, u, trial)
            if trial_value <= value + c1 * step * slope:
                break
            step *= 0.5
        else:
            break
        theta, value = trial, trial_value
        history.append(value)
        residual = el_residual(ctx, u, theta)
        iterations += 1
    logger.debug(f"θ 梯度下降 {iterations} 步，残差 {residual:.2e}")

    newton = 0
    while residual >= tol and newton < params['newton_max_iter']:
        g = g_gradient(ctx, u, theta)
        hessian = _hessian(ctx, u, theta)
        regular = hessian + sp.diags(1e-12 * shift * mass)
        try:
            step_dir = -splu(regular.tocsc()).solve(g)
        except RuntimeError:
            step_dir = -precond.solve(g)
        step = 1.0
        for _ in range(20):
            trial = theta + step * step_dir
            trial_residual = el_residual(ctx, u, trial)
            if trial_residual < residual:
                break
            step *= 0.5
        else:
            break
        theta, residual = trial, trial_residual
        value = g_functional(ctx, u, theta)
        history.append(value)
        newton += 1

    converged = residual < tol
    if not converged:
        raise ConvergenceError("θ 欧拉-拉格朗日方程未收敛",
                               diagnostic={'residual': residual, 'tol': tol,
                                           'iterations': iterations, 'newton_iterations': newton})
    logger.debug(f"θ 收敛: 牛顿 {newton} 步，𝒢 = {value:.8f}，残差 {residual:.2e}")
    return ThetaSolution(theta=theta, value=value, residual=residual, iterations=iterations,
                         newton_iterations=newton, history=history, converged=converged)
