"""
良态初值 - u⁰_ε = χ_ε(到最近涡旋的距离)·e^{iθ⁰}u*[a⁰, d, ξ⁰]
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from errors import AdmissibilityError, FlowError
from fields.tangent import TangentField
from logger_config import setup_logger
from renormalized.canonical import canonical_field
from renormalized.context import SurfaceContext
from renormalized.core_energy import core_profile
from renormalized.psi import check_admissible
from surface.base import SurfacePoint
from surface.geodesic import distance_field

logger = setup_logger(__name__)


def core_cutoff(distance: np.ndarray, epsilon: float, match: float) -> np.ndarray:
    """
    径向截断 χ_ε(r)：s = r/ε ≤ m 时为 f(s) + (1 − f(m))(s/m)²，之外为 1
    """
    profile = core_profile()
    s = np.asarray(distance, dtype=float) / epsilon
    inside = s <= match
    out = np.ones_like(s)
    f_match = float(profile(np.array([match]))[0])
    out[inside] = profile(s[inside]) + (1.0 - f_match) * (s[inside] / match) ** 2
    return np.clip(out, 0.0, 1.0)


def vortex_distance(ctx: SurfaceContext, points: List[SurfacePoint]) -> np.ndarray:
    """各顶点到最近涡旋的测地距离"""
    if not points:
        return np.full(ctx.geom.n_vertices, np.inf)
    return np.min(np.stack([distance_field(ctx.geom, p) for p in points]), axis=0)


def prepare_initial(ctx: SurfaceContext, points: List[SurfacePoint], degrees: Sequence[int], xi: np.ndarray,
                    theta: Optional[np.ndarray], epsilon: float, b0: Optional[int] = None,
                    w0: complex = 1.0 + 0.0j, params: Optional[Dict[str, Any]] = None) -> TangentField:
    """
    构造良态初值
    Args:
        ctx: 曲面上下文
        points: 初始涡旋位置 a⁰
        degrees: 度数（均为 ±1）
        xi: 调和系数 ξ⁰（需满足周期约束）
        theta: 相位 θ⁰（None 表示 0）
        epsilon: 涡核尺度
        b0, w0: 典范场的归一化
        params: 覆盖 config.FLOW_CONFIG（core_match）
    Raises:
        AdmissibilityError: 位置重合、度数和不等于 χ 或 |d| ≠ 1
    """
    params = {**config.FLOW_CONFIG, **(params or {})}
    if epsilon <= 0:
        raise FlowError("ε 必须为正", diagnostic={'epsilon': epsilon})
    check_admissible(ctx.geom, points, degrees)
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.size and np.any(np.abs(degrees) != 1):
        raise AdmissibilityError("良态初值要求 |d_j| = 1", diagnostic={'degrees': degrees})

    canonical = canonical_field(ctx, points, degrees, xi, b0=b0, w0=w0)
    phase = np.zeros(ctx.geom.n_vertices) if theta is None else np.asarray(theta, dtype=float)
    cutoff = core_cutoff(vortex_distance(ctx, points), epsilon, params['core_match'])
    u0 = TangentField(cutoff * np.exp(1j * phase) * canonical.values)
    cells = epsilon / ctx.cell
    if cells < 1.0:
        logger.warning(f"ε 只有 {cells:.2f} 个网格单元，涡核无法解析")
    logger.info(f"初值就绪: {len(points)} 个涡旋，ε={epsilon}，min|u| = {u0.norms().min():.3f}")
    return u0
