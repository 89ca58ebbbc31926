"""
重整化能量对涡旋位置的梯度

∇_{a_k} W^intr 由环绕 a_k 的应力张量边界积分给出：
    ∫_{∂B_η(a_k)} (j·ν) j − ½|j|² ν  dl
在 η₀ 与 η₀/2 两个半径上计算后按一阶外推；外在部分在临界 θ 处为 2π d_k i∇θ(a_k)。
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from errors import SeparationError
from logger_config import setup_logger
from renormalized.canonical import CanonicalField
from renormalized.context import SurfaceContext
from renormalized.extrinsic import g_functional
from renormalized.intrinsic import min_chord_separation
from surface.base import SurfacePoint
from surface.geodesic import exp_map

logger = setup_logger(__name__)


def ring_integral(ctx: SurfaceContext, point: SurfacePoint, vertex_current: np.ndarray,
                  eta: float, samples: int) -> np.ndarray:
    """
    应力张量在测地圆（切平面圆投影到曲面）上的积分
    Args:
        vertex_current: (V, 3) 顶点处的电流向量，按重心坐标插值
    Returns:
        R³ 中的切向量
    """
    geom = ctx.geom
    normal, e1, e2 = geom.point_frame(point)
    t = 2.0 * np.pi * np.arange(samples) / samples
    ring = point.position + eta * (np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2)
    if geom.analytic is not None:
        ring = geom.analytic.project(ring)
    faces, bary, projected = geom.locate(ring)
    if geom.analytic is not None:
        projected = ring
    current = np.einsum('sk,skd->sd', bary, vertex_current[geom.faces[faces]])
    face_n = geom.face_normals[faces]
    current = current - np.einsum('sd,sd->s', current, face_n)[:, None] * face_n
    radial = projected - point.position
    nu = radial - np.einsum('sd,sd->s', radial, face_n)[:, None] * face_n
    nu /= np.linalg.norm(nu, axis=1, keepdims=True)
    chord = np.linalg.norm(np.roll(projected, -1, axis=0) - projected, axis=1)
    dl = 0.5 * (chord + np.roll(chord, 1))
    flux = np.einsum('sd,sd->s', current, nu)
    square = np.einsum('sd,sd->s', current, current)
    integrand = flux[:, None] * current - 0.5 * square[:, None] * nu
    total = np.sum(dl[:, None] * integrand, axis=0)
    return total - np.dot(total, normal) * normal


def _check_separation(ctx: SurfaceContext, points: List[SurfacePoint], params: Dict[str, Any]) -> float:
    h = ctx.cell
    separation = min_chord_separation(points)
    if separation < params['min_separation_cells'] * h:
        raise SeparationError("涡旋间距过小，边界积分被污染",
                              diagnostic={'separation': float(separation), 'cell': h,
                                          'required_cells': params['min_separation_cells']})
    return min(params['eta_cells'] * h, params['disk_fraction'] * separation)


def grad_W(ctx: SurfaceContext, canonical: CanonicalField, theta: Optional[np.ndarray] = None,
           params: Optional[Dict[str, Any]] = None, method: Optional[str] = None) -> np.ndarray:
    """
    ∇_a W，每个涡旋一个 R³ 切向量
    Args:
        ctx: 曲面上下文
        canonical: u*[a, d, ξ]
        theta: 临界相位（None 表示内在模型，只算 ∇W^intr）
        params: 覆盖 config.RENORMALIZED_CONFIG
        method: 'split'（u* 的边界积分 + 2πd i∇θ）或 'full'（u₀ = e^{iθ}u* 的边界积分）
    Returns:
        (n, 3)
    Raises:
        SeparationError: 涡旋间距小于 min_separation_cells 个网格单元
    """
    params = {**config.RENORMALIZED_CONFIG, **(params or {})}
    method = method or params['gradient_method']
    points, degrees = canonical.points, canonical.degrees
    if not points:
        return np.zeros((0, 3))
    eta = _check_separation(ctx, points, params)

    face_current = canonical.face_current
    if theta is not None and method == 'full':
        face_current = face_current + ctx.dec.face_gradient(np.asarray(theta, dtype=float))
    vertex_current = ctx.vertex_vectors(face_current)

    gradients = np.zeros((len(points), 3))
    for k, point in enumerate(points):
        coarse = ring_integral(ctx, point, vertex_current, eta, params['ring_samples'])
        fine = ring_integral(ctx, point, vertex_current, 0.5 * eta, params['ring_samples'])
        gradients[k] = 2.0 * fine - coarse
    if theta is not None and method == 'split':
        gradients += extrinsic_gradient_term(ctx, points, degrees, theta)
    logger.debug(f"∇W ({method}): |g| = {np.round(np.linalg.norm(gradients, axis=1), 6).tolist()}")
    return gradients


def extrinsic_gradient_term(ctx: SurfaceContext, points: Sequence[SurfacePoint], degrees: Sequence[int],
                            theta: np.ndarray) -> np.ndarray:
    """2π d_k i∇θ(a_k)"""
    grads = ctx.dec.face_gradient(np.asarray(theta, dtype=float))
    out = np.zeros((len(points), 3))
    for k, point in enumerate(points):
        normal, _, _ = ctx.geom.point_frame(point)
        out[k] = 2.0 * np.pi * int(degrees[k]) * np.cross(normal, grads[point.face])
    return out


def _fd_step(model) -> float:
    return model.params['fd_step_cells'] * model.ctx.cell


def _displaced(model, configuration, k: int, direction: np.ndarray, step: float) -> List[SurfacePoint]:
    points = list(configuration.points)
    points[k] = exp_map(model.ctx.geom, points[k], step * direction)
    return points


def fd_gradient_W(model, configuration, step: Optional[float] = None) -> np.ndarray:
    """
    重整化能量的中心差分梯度（ξ 由 xi_update 更新，θ 热启动后重新求临界点）
    Args:
        model: VortexEnergyModel
        configuration: 基准 VortexConfiguration（θ 为临界相位）
        step: 差分步长（默认 fd_step_cells 个网格单元）
    """
    step = _fd_step(model) if step is None else step
    geom = model.ctx.geom
    out = np.zeros((len(configuration.points), 3))
    for k, point in enumerate(configuration.points):
        _, e1, e2 = geom.point_frame(point)
        for direction in (e1, e2):
            values = []
            for sign in (1.0, -1.0):
                moved = model.moved(configuration, _displaced(model, configuration, k, direction, sign * step))
                values.append(model.evaluate(moved).value.total)
            out[k] += (values[0] - values[1]) / (2.0 * step) * direction
    return out


def fd_gradient_G(model, configuration, step: Optional[float] = None) -> np.ndarray:
    """𝒢(u*[a], θ) 在 θ 固定时的中心差分梯度"""
    step = _fd_step(model) if step is None else step
    geom = model.ctx.geom
    theta = np.asarray(configuration.theta, dtype=float)
    out = np.zeros((len(configuration.points), 3))
    for k, point in enumerate(configuration.points):
        _, e1, e2 = geom.point_frame(point)
        for direction in (e1, e2):
            values = []
            for sign in (1.0, -1.0):
                moved = model.moved(configuration, _displaced(model, configuration, k, direction, sign * step))
                values.append(g_functional(model.ctx, model.canonical(moved).field, theta))
            out[k] += (values[0] - values[1]) / (2.0 * step) * direction
    return out
