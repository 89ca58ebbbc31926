"""
有效涡旋动力学 - a' = −(1/π)∇_a W(a, d, ξ, θ)

每步之后 ξ 按周期守恒更新，θ 从上一步热启动重新求临界点。
积分器为 Heun 格式，W 不下降时步长减半。
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

import config
from errors import CollisionError, EffectiveDynamicsError, SeparationError, StepTooLargeError
from logger_config import setup_logger
from renormalized.intrinsic import feasible_separation, min_chord_separation
from renormalized.model import Evaluation, VortexConfiguration, VortexEnergyModel
from surface.geodesic import exp_map, tangent_at

logger = setup_logger(__name__)


@dataclass
class EffectiveState:
    """有效动力学的一个状态"""

    t: float
    evaluation: Evaluation
    gradient: np.ndarray                    # (n, 3) ∇_a W
    h: float = 0.0                          # 到达此状态所用步长
    halvings: int = 0
    stalled: bool = False
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def configuration(self) -> VortexConfiguration:
        return self.evaluation.configuration

    @property
    def W(self) -> float:
        return self.evaluation.value.total

    @property
    def velocity(self) -> np.ndarray:
        return -self.gradient / np.pi

    def gradient_norm(self) -> float:
        return float(np.sqrt(np.sum(self.gradient ** 2)))


@dataclass
class EffectiveTrajectory:
    """采样状态与终止原因"""

    states: List[EffectiveState] = field(default_factory=list)
    reason: str = 'final_time'              # 'final_time' | 'collision' | 'blowup'
    ledger: List[float] = field(default_factory=list)   # 累计 Σ h(|g₀|² + |g₁|²)/2π
    integers: List[np.ndarray] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.W for s in self.states])

    def xi_series(self) -> np.ndarray:
        return np.stack([s.configuration.xi for s in self.states]) if self.states else np.zeros((0, 0))

    def ledger_imbalance(self) -> float:
        """|[W(0) − W(t)] − 耗散| / |W(0) − W(t)|"""
        if len(self.states) < 2:
            return 0.0
        drop = self.states[0].W - self.states[-1].W
        return float(abs(drop - self.ledger[-1]) / max(abs(drop), 1e-300))


def _move(model: VortexEnergyModel, configuration: VortexConfiguration, velocity: np.ndarray, h: float):
    geom = model.geom
    points = [exp_map(geom, p, h * v) for p, v in zip(configuration.points, velocity)]
    return model.moved(configuration, points)


def collision_threshold(model: VortexEnergyModel, params: Optional[Dict[str, Any]] = None) -> float:
    """
    碰撞阈值：不小于 W^intr 截断与 ∇W 边界积分仍可计算的最小间距
    """
    params = {**config.EFFECTIVE_CONFIG, **(params or {})}
    h = model.ctx.cell
    return max(params['collision_cells'] * h, model.params['min_separation_cells'] * h,
               feasible_separation(h, model.params))


def _check_collision(model: VortexEnergyModel, configuration: VortexConfiguration, params: Dict[str, Any]):
    separation = min_chord_separation(configuration.points)
    limit = collision_threshold(model, params)
    if separation < limit:
        raise CollisionError("涡旋间距低于碰撞阈值", diagnostic={'separation': separation, 'threshold': limit})


def evaluate_state(model: VortexEnergyModel, configuration: VortexConfiguration, t: float = 0.0) -> EffectiveState:
    """在构型处求 W 与 ∇W"""
    try:
        evaluation = model.evaluate(configuration)
        gradient = model.gradient(evaluation)
    except SeparationError as exc:
        raise CollisionError("涡旋间距过小，无法计算 W 或 ∇W", diagnostic=exc.diagnostic) from exc
    diagnostics = {'theta_residual': evaluation.value.diagnostics.get('theta_residual', 0.0)}
    return EffectiveState(t=t, evaluation=evaluation, gradient=gradient, diagnostics=diagnostics)


def effective_step(model: VortexEnergyModel, state: EffectiveState, h: float,
                   params: Optional[Dict[str, Any]] = None) -> EffectiveState:
    """
    Heun 一步：预测 a* = Exp_a(h v₀)，校正 a⁺ = Exp_a(h(v₀ + P v₁)/2)
    W(a⁺) > W(a) + w_tol 时步长减半；减半 max_halvings 次仍失败则原地停留一步
    Args:
        model: 能量模型
        state: 当前状态（θ 为临界点）
        h: 步长
        params: 覆盖 config.EFFECTIVE_CONFIG
    Raises:
        CollisionError: 新构型涡旋间距低于阈值
    """
    params = {**config.EFFECTIVE_CONFIG, **(params or {})}
    geom = model.geom
    configuration = state.configuration
    v0 = state.velocity
    for halving in range(params['max_halvings'] + 1):
        try:
            predicted = _move(model, configuration, v0, h)
            _check_collision(model, predicted, params)
            mid = evaluate_state(model, predicted, state.t + h)
            v1 = np.array([tangent_at(geom, p, v) for p, v in zip(configuration.points, mid.velocity)])
            corrected = _move(model, configuration, 0.5 * (v0 + v1), h)
        except StepTooLargeError:
            h *= 0.5
            continue
        _check_collision(model, corrected, params)
        new = evaluate_state(model, corrected, state.t + h)
        if new.W <= state.W + params['w_tol']:
            new.h = h
            new.halvings = halving
            return new
        logger.debug(f"W 上升 {new.W - state.W:.3e}，步长减半为 {h / 2:.3e}")
        h *= 0.5
    logger.warning(f"t={state.t:.6g} 处步长减半 {params['max_halvings']} 次仍未下降，原地停留")
    return EffectiveState(t=state.t + h, evaluation=state.evaluation, gradient=state.gradient, h=h,
                          halvings=params['max_halvings'], stalled=True, diagnostics=dict(state.diagnostics))


def run_effective(model: VortexEnergyModel, configuration: VortexConfiguration, T: Optional[float] = None,
                  h: Optional[float] = None, params: Optional[Dict[str, Any]] = None) -> EffectiveTrajectory:
    """
    从 configuration 积分到 T（或碰撞、梯度爆炸）
    Args:
        model: 能量模型
        configuration: 初始构型 (a⁰, d, ξ⁰, θ 初值)
        T: 终止时间（默认 config.EFFECTIVE_CONFIG['T']）
        h: 初始步长
        params: 覆盖 config.EFFECTIVE_CONFIG
    """
    params = {**config.EFFECTIVE_CONFIG, **(params or {})}
    T = params['T'] if T is None else T
    h = params['h'] if h is None else h
    if T < 0 or h <= 0:
        raise EffectiveDynamicsError("终止时间需非负、步长需为正", diagnostic={'T': T, 'h': h})
    model.validate(configuration)

    trajectory = EffectiveTrajectory()
    state = evaluate_state(model, configuration)
    trajectory.states.append(state)
    trajectory.ledger.append(0.0)
    trajectory.integers.append(model.integers(state.configuration))
    ledger = 0.0
    n_steps = 0
    while state.t < T - 1e-12 * max(T, 1.0):
        if state.gradient_norm() > params['gradient_blowup']:
            trajectory.reason = 'blowup'
            logger.warning(f"梯度爆炸: |∇W| = {state.gradient_norm():.3e}")
            break
        step = min(h, T - state.t)
        try:
            new = effective_step(model, state, step, params)
        except CollisionError as exc:
            trajectory.reason = 'collision'
            trajectory.diagnostics['collision'] = exc.diagnostic
            logger.info(f"t={state.t:.6g} 处检测到碰撞，停止积分")
            break
        if not new.stalled:
            ledger += new.h * (np.sum(state.gradient ** 2) + np.sum(new.gradient ** 2)) / (2.0 * np.pi)
        state = new
        n_steps += 1
        if n_steps % params['sample_stride'] == 0 or state.t >= T - 1e-12 * max(T, 1.0):
            trajectory.states.append(state)
            trajectory.ledger.append(float(ledger))
            trajectory.integers.append(model.integers(state.configuration))
    trajectory.diagnostics['steps'] = n_steps
    logger.info(f"有效动力学结束: t={state.t:.6g}，{n_steps} 步，W={state.W:.6f}，原因 {trajectory.reason}")
    return trajectory
