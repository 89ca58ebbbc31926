"""
GL 流轨迹 - 采样时间、能量、涡旋、调和通量与 T* 事件
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from dec.harmonic import HarmonicBasis
from fields.connection import Connection
from fields.energy import EnergyBreakdown
from fields.tangent import TangentField, current_j
from flow.vortex_tracker import TrackedVortex


@dataclass
class FlowSample:
    t: float
    step: int
    energy: EnergyBreakdown
    vortices: List[TrackedVortex]
    vortex_ids: List[int]
    flux: np.ndarray
    max_norm: float
    dissipation: float                     # 截至此刻的累计耗散
    snapshot: Optional[TangentField] = None


@dataclass
class FlowTrajectory:
    """GL 流的采样轨迹"""

    epsilon: float
    model: str = 'extrinsic'
    samples: List[FlowSample] = field(default_factory=list)
    event: Optional[Dict[str, Any]] = None           # T* 事件（初始采样之后）
    initial_event: Optional[Dict[str, Any]] = None   # 初始采样上的追踪异常
    halvings: int = 0

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def energies(self) -> List[EnergyBreakdown]:
        return [s.energy for s in self.samples]

    def total_energy(self) -> np.ndarray:
        return np.array([s.energy.total for s in self.samples])

    @property
    def t_star(self) -> Optional[float]:
        return None if self.event is None else self.event['t']

    def snapshots(self) -> List[TangentField]:
        return [s.snapshot for s in self.samples if s.snapshot is not None]

    def degree_sums(self) -> List[int]:
        return [sum(v.degree for v in s.vortices) for s in self.samples]

    def vortex_count(self) -> int:
        """初始采样的涡旋数 n"""
        return len(self.samples[0].vortices) if self.samples else 0

    def positions(self, k: int) -> List[np.ndarray]:
        """第 k 个采样各涡旋位置，按编号排序"""
        sample = self.samples[k]
        order = np.argsort(sample.vortex_ids)
        return [sample.vortices[i].position for i in order]


def flux_coefficients(basis: HarmonicBasis, conn: Connection, u: TangentField) -> np.ndarray:
    """P_H(j(u)) 在调和基下的系数"""
    if basis.dimension == 0:
        return np.zeros(0)
    j, _ = current_j(u, conn)
    return basis.coefficients(j)


def flux_series(trajectory: FlowTrajectory) -> np.ndarray:
    """ξ(t)：(采样数, 2𝔤)"""
    if not trajectory.samples:
        return np.zeros((0, 0))
    return np.stack([s.flux for s in trajectory.samples])


def excess_energy(trajectory: FlowTrajectory, gamma: float, n: Optional[int] = None) -> np.ndarray:
    """
    φ(t) = F_ε(u(t)) − πn|log ε| − nγ
    Args:
        gamma: 核能量
        n: 涡旋数（默认取初始采样检测到的数目）
    """
    n = trajectory.vortex_count() if n is None else n
    offset = np.pi * n * abs(np.log(trajectory.epsilon)) + n * gamma
    return trajectory.total_energy() - offset
