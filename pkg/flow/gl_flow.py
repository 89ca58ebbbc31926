"""
GL 梯度流 - (1/|log ε|)∂_t u − Δ_g u + 𝒮²u + (1/ε²)(|u|² − 1)u = 0

半隐式格式（凸分裂，τ' = Δt|log ε|）：
    (M/τ' + K + M𝒮² + M|a|²/ε²) b = (M/τ' + M/ε²) a
在交错实表示下为对称正定方程组，先用 Jacobi 预条件 CG，失败时退回 LU。
"""

from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

import config
from errors import FlowError, StabilityError
from fields.energy import (EnergyBreakdown, covariant_stiffness_for, energy, from_real, real_block,
                           shape_square_blocks, to_real)
from fields.tangent import TangentField
from flow.trajectory import FlowSample, FlowTrajectory, flux_coefficients
from flow.trajectory_tracker import VortexTrajectoryTracker
from flow.vortex_tracker import track_vortices
from logger_config import setup_logger
from renormalized.context import SurfaceContext

logger = setup_logger(__name__)

SCHEMES = ('semi_implicit', 'explicit')


@dataclass
class FlowConfig:
    """GL 流参数"""

    epsilon: float = config.FLOW_CONFIG['epsilon']
    dt: float = config.FLOW_CONFIG['dt']
    T: float = config.FLOW_CONFIG['T']
    scheme: str = config.FLOW_CONFIG['scheme']
    model: str = config.FLOW_CONFIG['model']
    stride: int = config.FLOW_CONFIG['stride']
    explicit_cfl: float = config.FLOW_CONFIG['explicit_cfl']
    energy_tol: float = config.FLOW_CONFIG['energy_tol']
    max_halvings: int = config.FLOW_CONFIG['max_halvings']
    cg_tol: float = config.FLOW_CONFIG['cg_tol']
    cg_maxiter: int = config.FLOW_CONFIG['cg_maxiter']
    keep_snapshots: bool = config.FLOW_CONFIG['keep_snapshots']
    core_match: float = config.FLOW_CONFIG['core_match']
    stop_at_collision: bool = config.FLOW_CONFIG['stop_at_collision']
    tracking: Dict[str, Any] = field(default_factory=lambda: dict(config.TRACKING_CONFIG))

    def __post_init__(self):
        if self.epsilon <= 0:
            raise FlowError("ε 必须为正", diagnostic={'epsilon': self.epsilon})
        if self.dt <= 0 or self.T < 0:
            raise FlowError("时间步长必须为正、终止时间非负", diagnostic={'dt': self.dt, 'T': self.T})
        if self.scheme not in SCHEMES:
            raise FlowError(f"未知时间格式: {self.scheme}")
        if self.model not in ('extrinsic', 'intrinsic'):
            raise FlowError(f"未知能量模型: {self.model}")
        self.stride = max(1, int(self.stride))
        self.tracking = {**config.TRACKING_CONFIG, **(self.tracking or {})}

    @property
    def log_eps(self) -> float:
        return abs(np.log(self.epsilon))

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]] = None,
                  tracking: Optional[Dict[str, Any]] = None) -> "FlowConfig":
        """从配置字典构造，未知键忽略，缺省键取 config.FLOW_CONFIG"""
        values = {**config.FLOW_CONFIG, **(values or {})}
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in values.items() if k in names}
        kwargs['tracking'] = {**config.TRACKING_CONFIG, **(tracking or {}), **(values.get('tracking') or {})}
        return cls(**kwargs)


@dataclass
class FlowState:
    """时间推进状态"""

    t: float
    field: TangentField
    energy: EnergyBreakdown
    step: int = 0
    dt: float = 0.0
    dissipation: float = 0.0       # Σ Δt‖(u^{n+1} − u^n)/Δt‖² / |log ε|
    halvings: int = 0


class GLFlowSolver:
    """
    GL 流求解器
    Args:
        ctx: 曲面上下文（几何、联络、调和基）
        flow_config: FlowConfig
    """

    def __init__(self, ctx: SurfaceContext, flow_config: FlowConfig):
        self.ctx = ctx
        self.geom = ctx.geom
        self.conn = ctx.conn
        self.config = flow_config
        areas = self.geom.vertex_areas
        self.mass = np.repeat(areas, 2)
        self.stiffness = real_block(covariant_stiffness_for(self.conn))
        if flow_config.model == 'extrinsic':
            self.shape_term = shape_square_blocks(self.geom)
        else:
            self.shape_term = sp.csr_matrix((2 * self.geom.n_vertices, 2 * self.geom.n_vertices))
        self.static = (self.stiffness + self.shape_term).tocsr()
        if flow_config.scheme == 'explicit':
            self.check_stability(flow_config.dt)
        logger.info(f"GL 流求解器就绪: ε={flow_config.epsilon}，Δt={flow_config.dt}，"
                    f"格式 {flow_config.scheme}，模型 {flow_config.model}")

    # ------------------------------------------------------------------
    # 稳定性与能量
    # ------------------------------------------------------------------
    def spectral_bound(self) -> float:
        """M⁻¹(K + M𝒮²) 加势能 Lipschitz 常数 2/ε² 的 Gershgorin 上界"""
        row_sums = np.asarray(np.abs(self.static).sum(axis=1)).ravel()
        return float(np.max(row_sums / self.mass) + 2.0 / self.config.epsilon ** 2)

    def check_stability(self, dt: float):
        """
        显式格式条件 Δt|log ε|·λ_max ≤ 2c
        Raises:
            StabilityError
        """
        bound = self.spectral_bound()
        value = dt * self.config.log_eps * bound
        limit = 2.0 * self.config.explicit_cfl
        if value > limit:
            raise StabilityError("显式格式步长超出稳定性条件",
                                 diagnostic={'dt': dt, 'lambda_max': bound, 'product': value, 'limit': limit,
                                             'dt_max': limit / (self.config.log_eps * bound)})

    def energy(self, u: TangentField) -> EnergyBreakdown:
        return energy(self.geom, self.conn, u, self.config.epsilon, model=self.config.model)

    def initial_state(self, u0: TangentField) -> FlowState:
        return FlowState(t=0.0, field=u0.copy(), energy=self.energy(u0), dt=self.config.dt)

    # ------------------------------------------------------------------
    # 单步
    # ------------------------------------------------------------------
    def _solve(self, matrix: sp.csr_matrix, rhs: np.ndarray, x0: np.ndarray) -> np.ndarray:
        diag = matrix.diagonal()
        precond = LinearOperator(matrix.shape, matvec=lambda x: x / diag)
        x, info = cg(matrix, rhs, x0=x0, rtol=self.config.cg_tol, maxiter=self.config.cg_maxiter, M=precond)
        if info == 0:
            return x
        logger.warning(f"CG 未收敛 (info={info})，改用 LU 分解")
        try:
            return splu(matrix.tocsc()).solve(rhs)
        except RuntimeError as exc:
            raise FlowError("线性求解失败", diagnostic={'cg_info': int(info), 'lu': str(exc)}) from exc

    def _advance(self, a: np.ndarray, dt: float) -> np.ndarray:
        """一步推进（不做能量检验），返回交错实向量"""
        eps2 = self.config.epsilon ** 2
        tau = dt * self.config.log_eps
        x = to_real(a)
        mod2 = np.repeat(np.abs(a) ** 2, 2)
        if self.config.scheme == 'explicit':
            force = self.static @ x + self.mass * (mod2 - 1.0) * x / eps2
            return x - tau * force / self.mass
        matrix = (self.static + sp.diags(self.mass / tau + self.mass * mod2 / eps2)).tocsr()
        rhs = (self.mass / tau + self.mass / eps2) * x
        return self._solve(matrix, rhs, x)

    def step(self, state: FlowState) -> FlowState:
        """
        推进一步；能量上升时步长减半重试
        Raises:
            FlowError: 减半 max_halvings 次后能量仍上升
        """
        cfg = self.config
        a = state.field.values
        dt = state.dt
        for attempt in range(cfg.max_halvings + 1):
            if cfg.scheme == 'explicit':
                self.check_stability(dt)
            b = from_real(self._advance(a, dt))
            norms = np.abs(b)
            over = norms > 1.0
            if over.any():
                # 截断到单位圆盘，势能与 Dirichlet 能都不增
                b[over] /= norms[over]
            u_new = TangentField(b)
            e_new = self.energy(u_new)
            if e_new.total <= state.energy.total + cfg.energy_tol:
                change = b - a
                dissipation = float(np.dot(self.geom.vertex_areas, np.abs(change) ** 2)) / (dt * cfg.log_eps)
                return FlowState(t=state.t + dt, field=u_new, energy=e_new, step=state.step + 1, dt=dt,
                                 dissipation=state.dissipation + dissipation, halvings=state.halvings + attempt)
            logger.warning(f"能量上升 {e_new.total - state.energy.total:.3e}，步长减半为 {dt / 2:.3e}")
            dt *= 0.5
        raise FlowError("步长减半后能量仍然上升",
                        diagnostic={'t': state.t, 'dt': dt, 'halvings': cfg.max_halvings,
                                    'energy': state.energy.total})

    # ------------------------------------------------------------------
    # 完整运行
    # ------------------------------------------------------------------
    def _sample(self, state: FlowState, tracker: VortexTrajectoryTracker, trajectory: FlowTrajectory):
        vortices = track_vortices(state.field, self.conn, self.config.tracking)
        event = tracker.update_tracking(state.t, vortices)
        if event is not None:
            trajectory.event = event
        trajectory.initial_event = tracker.initial_event
        trajectory.samples.append(FlowSample(
            t=state.t, step=state.step, energy=state.energy, vortices=vortices,
            vortex_ids=list(tracker.last_ids),
            flux=flux_coefficients(self.ctx.basis, self.conn, state.field),
            max_norm=state.field.max_norm(), dissipation=state.dissipation,
            snapshot=state.field.copy() if self.config.keep_snapshots else None))
        return event

    def run(self, u0: TangentField) -> FlowTrajectory:
        """从 u0 积分到 T（或在 T* 事件处停止）"""
        cfg = self.config
        tracker = VortexTrajectoryTracker(cfg.tracking, self.geom.mean_edge_length,
                                          self.geom.euler_characteristic())
        trajectory = FlowTrajectory(epsilon=cfg.epsilon, model=cfg.model)
        state = self.initial_state(u0)
        self._sample(state, tracker, trajectory)
        if tracker.initial_event is not None and tracker.initial_event['reason'] == 'tracking_failure':
            logger.warning("初始场的涡旋检测失败，检查 ε 是否小于网格分辨率")
        while state.t < cfg.T - 1e-12 * max(cfg.T, 1.0):
            state = self.step(replace(state, dt=min(state.dt, cfg.T - state.t)))
            if state.step % cfg.stride == 0 or state.t >= cfg.T - 1e-12 * max(cfg.T, 1.0):
                event = self._sample(state, tracker, trajectory)
                if event is not None and cfg.stop_at_collision:
                    logger.info(f"在 T* = {state.t:.6g} 处停止")
                    break
        trajectory.halvings = state.halvings
        for vid, status in tracker.get_tracking_status().items():
            logger.debug(f"涡旋 {vid}: 度数 {status['degree']}，{status['samples']} 个采样，"
                         f"{'活跃' if status['active'] else '已丢失'}")
        logger.info(f"GL 流结束: t={state.t:.6g}，{state.step} 步，F={state.energy.total:.6f}，"
                    f"{len(trajectory)} 个采样")
        return trajectory


def step(state: FlowState, solver: GLFlowSolver) -> FlowState:
    return solver.step(state)


def run(u0: TangentField, flow_config: FlowConfig, ctx: SurfaceContext) -> FlowTrajectory:
    return GLFlowSolver(ctx, flow_config).run(u0)
