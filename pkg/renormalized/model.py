"""
重整化能量模型 - W(a, d, ξ, θ) = W^intr(a, d, ξ) + 𝒢(u*[a, d, ξ], θ)

VortexEnergyModel 固定一个曲面上下文、能量模型与归一化 (b⁰, w⁰)，
对外提供求值、梯度和构型移动（ξ 按周期守恒更新，θ 热启动）
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

import config
from errors import ConfigError, PeriodDefectError
from logger_config import setup_logger
from renormalized.canonical import CanonicalField, canonical_field, farthest_vertex
from renormalized.constraint import admissible_xi, period_constraint, xi_update
from renormalized.context import SurfaceContext
from renormalized.extrinsic import ThetaSolution, theta_critical
from renormalized.gradient import grad_W
from renormalized.intrinsic import IntrinsicValue, w_intrinsic
from renormalized.psi import check_admissible
from surface.base import SurfaceGeometry, SurfacePoint

logger = setup_logger(__name__)

MODELS = ('extrinsic', 'intrinsic')


@dataclass
class VortexConfiguration:
    """涡旋构型 (a, d, ξ, θ)"""

    points: List[SurfacePoint]
    degrees: np.ndarray
    xi: np.ndarray
    theta: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = list(self.points)
        self.degrees = np.asarray(self.degrees, dtype=np.int64).reshape(-1)
        self.xi = np.asarray(self.xi, dtype=float).reshape(-1)

    @property
    def count(self) -> int:
        return len(self.points)

    def positions(self) -> np.ndarray:
        """(n, 3)"""
        if not self.points:
            return np.zeros((0, 3))
        return np.array([p.position for p in self.points])

    def to_record(self) -> dict:
        return {
            'points': [p.to_record() for p in self.points],
            'degrees': self.degrees.tolist(),
            'xi': self.xi.tolist(),
        }

    @classmethod
    def from_record(cls, geom: SurfaceGeometry, record: Dict[str, Any]) -> "VortexConfiguration":
        """从 JSON 记录恢复；点可以是 {'face', 'bary'}、{'vertex'} 或 {'position'}"""
        points = [point_from_record(geom, item) for item in record.get('points', [])]
        return cls(points=points, degrees=record.get('degrees', []), xi=record.get('xi', []))


def point_from_record(geom: SurfaceGeometry, record: Any) -> SurfacePoint:
    """解析涡旋位置记录"""
    if isinstance(record, dict):
        if 'face' in record and 'bary' in record:
            face = int(record['face'])
            bary = np.asarray(record['bary'], dtype=float)
            position = bary @ geom.vertices[geom.faces[face]]
            if geom.analytic is not None:
                return geom.make_point(position)
            return SurfacePoint(face=face, bary=bary, position=position)
        if 'vertex' in record:
            return geom.vertex_point(int(record['vertex']))
        record = record['position']
    return geom.make_point(np.asarray(record, dtype=float))


@dataclass
class RenormalizedValue:
    """W 的分解"""

    w_intr: float
    g_extr: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.w_intr + self.g_extr

    def to_dict(self) -> dict:
        return {'w_intr': self.w_intr, 'g_extr': self.g_extr, 'total': self.total,
                'diagnostics': self.diagnostics}


@dataclass
class Evaluation:
    """一次求值的全部产物"""

    value: RenormalizedValue
    field: CanonicalField
    configuration: VortexConfiguration
    intrinsic: IntrinsicValue
    theta: Optional[ThetaSolution] = None


class VortexEnergyModel:
    """
    重整化能量模型
    Args:
        ctx: 曲面上下文
        params: 覆盖 config.RENORMALIZED_CONFIG
        model: 'extrinsic'（W^intr + 𝒢）或 'intrinsic'（仅 W^intr）
        b0: 归一化顶点，None 表示首次构造典范场时取离涡旋最远的顶点并固定
        w0: b⁰ 处的单位复数
    """

    def __init__(self, ctx: SurfaceContext, params: Optional[Dict[str, Any]] = None,
                 model: str = 'extrinsic', b0: Optional[int] = None, w0: complex = 1.0 + 0.0j):
        if model not in MODELS:
            raise ConfigError(f"未知能量模型: {model}", module="renormalized-energy",
                              diagnostic={'model': model, 'allowed': list(MODELS)})
        self.ctx = ctx
        self.params = {**config.RENORMALIZED_CONFIG, **(params or {})}
        self.model = model
        self.b0 = b0
        self.w0 = complex(w0)

    @property
    def geom(self) -> SurfaceGeometry:
        return self.ctx.geom

    @property
    def extrinsic(self) -> bool:
        return self.model == 'extrinsic'

    # ------------------------------------------------------------------
    # 构型
    # ------------------------------------------------------------------
    def configuration(self, points: List[SurfacePoint], degrees: Sequence[int],
                      integers: Optional[Sequence[int]] = None, xi: Optional[np.ndarray] = None,
                      theta: Optional[np.ndarray] = None) -> VortexConfiguration:
        """
        由位置与度数构造可容许构型
        Args:
            integers: 周期整数（与 xi 二选一；都省略时取离 ξ = 0 最近的整数）
            xi: 直接给定调和系数（需满足周期约束）
        """
        check_admissible(self.geom, points, degrees)
        if xi is None:
            xi, _ = admissible_xi(self.ctx, points, degrees, integers=integers, params=self.params)
        config_ = VortexConfiguration(points=points, degrees=degrees, xi=xi, theta=theta)
        self.validate(config_)
        return config_

    def validate(self, configuration: VortexConfiguration):
        """
        检查可容许性与周期约束
        Raises:
            AdmissibilityError, PeriodDefectError
        """
        check_admissible(self.geom, configuration.points, configuration.degrees)
        if configuration.xi.size != self.ctx.harmonic_dimension:
            raise PeriodDefectError("调和系数长度与曲面亏格不符",
                                    diagnostic={'got': int(configuration.xi.size),
                                                'expected': self.ctx.harmonic_dimension})
        constraint = period_constraint(self.ctx, configuration.points, configuration.degrees, params=self.params)
        defect = constraint.defect(configuration.xi)
        if defect.size and np.abs(defect).max() > self.params['period_tol']:
            raise PeriodDefectError("ξ 不满足周期约束", diagnostic={'defect': defect})

    def integers(self, configuration: VortexConfiguration) -> np.ndarray:
        """构型的周期整数向量"""
        constraint = period_constraint(self.ctx, configuration.points, configuration.degrees, params=self.params)
        return constraint.nearest_integers(configuration.xi)

    def moved(self, configuration: VortexConfiguration, points: List[SurfacePoint]) -> VortexConfiguration:
        """涡旋移动到 points：ξ 保持周期整数，θ 沿用作为热启动"""
        xi = xi_update(self.ctx, configuration.points, configuration.degrees, configuration.xi, points,
                       params=self.params)
        theta = None if configuration.theta is None else np.array(configuration.theta, copy=True)
        return VortexConfiguration(points=points, degrees=configuration.degrees, xi=xi, theta=theta)

    # ------------------------------------------------------------------
    # 求值
    # ------------------------------------------------------------------
    def canonical(self, configuration: VortexConfiguration) -> CanonicalField:
        if self.b0 is None:
            self.b0 = farthest_vertex(self.ctx, configuration.points)
            logger.debug(f"归一化顶点固定为 b0={self.b0}")
        return canonical_field(self.ctx, configuration.points, configuration.degrees, configuration.xi,
                               b0=self.b0, w0=self.w0, params=self.params)

    def evaluate(self, configuration: VortexConfiguration,
                 theta_init: Optional[np.ndarray] = None) -> Evaluation:
        """
        W(a, d, ξ, θ)，θ 取 𝒢(u*, ·) 的临界点（从 theta_init 或构型自带的 θ 出发）
        """
        canonical = self.canonical(configuration)
        intrinsic = w_intrinsic(self.ctx, canonical, params=self.params)
        diagnostics: Dict[str, Any] = {'w_intr_error': intrinsic.error,
                                       'rho_table': intrinsic.table.tolist(),
                                       'closure': canonical.diagnostics.get('closure', 0.0)}
        solution = None
        g_value = 0.0
        theta = None
        if self.extrinsic:
            start = configuration.theta if theta_init is None else theta_init
            solution = theta_critical(self.ctx, canonical.field, theta_init=start, params=self.params)
            g_value = solution.value
            theta = solution.theta
            diagnostics['theta_residual'] = solution.residual
            diagnostics['theta_iterations'] = solution.iterations + solution.newton_iterations
        value = RenormalizedValue(w_intr=intrinsic.value, g_extr=g_value, diagnostics=diagnostics)
        evaluated = replace(configuration, theta=theta)
        return Evaluation(value=value, field=canonical, configuration=evaluated, intrinsic=intrinsic, theta=solution)

    def gradient(self, evaluation: Evaluation, method: Optional[str] = None) -> np.ndarray:
        """∇_a W，(n, 3)"""
        theta = evaluation.theta.theta if evaluation.theta is not None else None
        return grad_W(self.ctx, evaluation.field, theta=theta, params=self.params, method=method)


def renormalized_W(ctx: SurfaceContext, configuration: VortexConfiguration,
                   params: Optional[Dict[str, Any]] = None, model: str = 'extrinsic',
                   theta: Optional[np.ndarray] = None) -> RenormalizedValue:
    """
    W = W^intr + 𝒢 的一次性求值
    Args:
        theta: θ 初值（默认用构型自带的 θ，再默认 0）
    """
    return VortexEnergyModel(ctx, params=params, model=model).evaluate(configuration, theta_init=theta).value
