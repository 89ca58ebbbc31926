"""
核能量 γ - 径向剖面 f'' + f'/r − f/r² + (1 − f²)f = 0，f(0) = 0，f(∞) = 1

打靶求 f'(0)，r_match 之外用渐近展开
    f ≈ 1 − 1/(2r²) − 9/(8r⁴) − 161/(16r⁶)
γ = lim_R [2π∫_0^R e(r) r dr − π log R]，e = ½(f'² + f²/r²) + ¼(1 − f²)²
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

import config
from errors import ConvergenceError
from logger_config import setup_logger

logger = setup_logger(__name__)


def _rhs(r, y):
    f, fp = y
    return [fp, -fp / r + f / r ** 2 - (1.0 - f * f) * f]


def _overshoot(r, y):
    return y[0] - 1.0


_overshoot.terminal = True
_overshoot.direction = 1


def _turn(r, y):
    return y[1]


_turn.terminal = True
_turn.direction = -1


def _shoot(slope: float, r_start: float, r_end: float):
    y0 = [slope * r_start * (1.0 - r_start ** 2 / 8.0), slope * (1.0 - 3.0 * r_start ** 2 / 8.0)]
    return solve_ivp(_rhs, (r_start, r_end), y0, method='DOP853', rtol=1e-12, atol=1e-14,
                     events=(_overshoot, _turn), dense_output=True)


def tail_profile(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """渐近展开的 (f, f')"""
    r = np.asarray(r, dtype=float)
    f = 1.0 - 1.0 / (2 * r ** 2) - 9.0 / (8 * r ** 4) - 161.0 / (16 * r ** 6)
    fp = 1.0 / r ** 3 + 9.0 / (2 * r ** 5) + 483.0 / (8 * r ** 7)
    return f, fp


def energy_density(f: np.ndarray, fp: np.ndarray, r: np.ndarray) -> np.ndarray:
    return 0.5 * (fp ** 2 + f ** 2 / r ** 2) + 0.25 * (1.0 - f ** 2) ** 2


class CoreProfile:
    """
    ε = 1 的径向涡核剖面
    Args:
        slope: f'(0)
        solution: 打靶解（含稠密输出）
        r_start: 积分起点
        r_match: 与渐近展开衔接的半径
    """

    def __init__(self, slope: float, solution, r_start: float, r_match: float):
        self.slope = slope
        self.solution = solution
        self.r_start = r_start
        self.r_match = r_match

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        core = r < self.r_start
        mid = (~core) & (r <= self.r_match)
        far = r > self.r_match
        out[core] = self.slope * r[core]
        if mid.any():
            out[mid] = self.solution.sol(r[mid])[0]
        if far.any():
            out[far] = tail_profile(r[far])[0]
        return np.clip(out, 0.0, 1.0)

    def derivative(self, r: float) -> float:
        if r < self.r_start:
            return self.slope
        if r <= self.r_match:
            return float(self.solution.sol(r)[1])
        return float(tail_profile(r)[1])

    def disk_energy(self, radius: float) -> float:
        """2π∫_0^R e(r) r dr"""
        def integrand(r, source):
            if source == 'ode':
                f, fp = self.solution.sol(r)
            else:
                f, fp = tail_profile(r)
            return float(energy_density(f, fp, r) * r)

        # [0, r_start] 上 e ≈ slope² + ¼
        inner = (self.slope ** 2 + 0.25) * self.r_start ** 2 / 2.0
        upper = min(radius, self.r_match)
        ode_part, _ = quad(integrand, self.r_start, upper, args=('ode',), limit=400, epsabs=1e-13, epsrel=1e-12)
        tail_part = 0.0
        if radius > self.r_match:
            tail_part, _ = quad(integrand, self.r_match, radius, args=('tail',), limit=400,
                                epsabs=1e-13, epsrel=1e-12)
        return 2.0 * np.pi * (inner + ode_part + tail_part)


def solve_profile(params: Optional[Dict[str, Any]] = None) -> CoreProfile:
    """
    二分打靶：f 越过 1 说明斜率过大，f' 变负说明斜率过小
    Raises:
        ConvergenceError: 区间端点不夹住解
    """
    params = {**config.CORE_CONFIG, **(params or {})}
    lo, hi = params['slope_bracket']
    r_start, r_shoot = params['r_start'], params['r_shoot']

    def classify(slope: float) -> int:
        sol = _shoot(slope, r_start, r_shoot)
        if sol.t_events[0].size:
            return 1
        if sol.t_events[1].size:
            return -1
        return 0

    if classify(lo) != -1 or classify(hi) != 1:
        raise ConvergenceError("打靶区间未夹住剖面斜率", diagnostic={'bracket': [lo, hi]})
    for _ in range(params['bisection_steps']):
        mid = 0.5 * (lo + hi)
        verdict = classify(mid)
        if verdict == 0:
            lo = hi = mid
            break
        if verdict > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    slope = 0.5 * (lo + hi)
    solution = _shoot(slope, r_start, params['r_match'] * 1.05)
    if solution.t[-1] < params['r_match']:
        raise ConvergenceError("打靶解在衔接半径之前发散",
                               diagnostic={'slope': slope, 'reached': float(solution.t[-1])})
    f_match = float(solution.sol(params['r_match'])[0])
    tail_match = float(tail_profile(params['r_match'])[0])
    logger.debug(f"核剖面: f'(0) = {slope:.12f}，衔接处 f = {f_match:.8f}（渐近 {tail_match:.8f}）")
    return CoreProfile(slope, solution, r_start, params['r_match'])


@dataclass
class CoreEnergy:
    """γ 及其误差估计"""

    gamma: float
    error: float
    radii: Tuple[float, ...]
    estimates: Tuple[float, ...]
    slope: float

    def to_dict(self) -> dict:
        return {'gamma': self.gamma, 'error': self.error, 'radii': list(self.radii),
                'estimates': list(self.estimates), 'slope': self.slope}


def gamma_estimate(profile: CoreProfile, radius: float) -> float:
    """E(R) − π log R，再加上 R 以外的渐近修正 −π/(4R²)"""
    return profile.disk_energy(radius) - np.pi * np.log(radius) - np.pi / (4.0 * radius ** 2)


@lru_cache(maxsize=4)
def _core_energy_cached(items: Tuple[Tuple[str, Any], ...]) -> Tuple[CoreEnergy, CoreProfile]:
    params = dict(items)
    profile = solve_profile(params)
    radii = tuple(float(r) for r in params['radii'])
    estimates = tuple(gamma_estimate(profile, r) for r in radii)
    error = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else 0.0
    result = CoreEnergy(gamma=estimates[-1], error=error, radii=radii, estimates=estimates, slope=profile.slope)
    logger.info(f"核能量 γ = {result.gamma:.8f} (±{result.error:.1e})")
    return result, profile


def _freeze(params: Optional[Dict[str, Any]]) -> Tuple[Tuple[str, Any], ...]:
    merged = {**config.CORE_CONFIG, **(params or {})}
    return tuple(sorted((k, tuple(v) if isinstance(v, (list, tuple)) else v) for k, v in merged.items()))


def core_energy(params: Optional[Dict[str, Any]] = None) -> CoreEnergy:
    """核能量 γ（与网格无关，结果缓存）"""
    return _core_energy_cached(_freeze(params))[0]


def core_profile(params: Optional[Dict[str, Any]] = None) -> CoreProfile:
    """径向剖面 f（缓存）"""
    return _core_energy_cached(_freeze(params))[1]
