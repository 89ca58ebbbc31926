"""
涡旋轨迹追踪模块 - 在相邻采样之间匹配涡旋编号，记录轨迹并检测 T* 事件
"""

from collections import deque
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from flow.vortex_tracker import TrackedVortex
from logger_config import setup_logger

logger = setup_logger(__name__)


class VortexTrajectoryTracker:
    """逐采样的涡旋轨迹追踪器"""

    def __init__(self, tracking_config: Dict[str, Any], cell: float, expected_degree_sum: int):
        """
        初始化轨迹追踪器
        Args:
            tracking_config: 追踪配置（config.TRACKING_CONFIG 的覆盖结果）
            cell: 网格单元尺度 h
            expected_degree_sum: 度数和应等于 χ(M)
        """
        self.tracking_config = tracking_config
        self.merge_radius = tracking_config['merge_radius_cells'] * cell
        self.expected_degree_sum = expected_degree_sum

        # 轨迹存储
        self.trail_points = {}      # {vortex_id: deque of (t, position)}
        self.tracking_active = {}   # {vortex_id: bool}
        self.degrees = {}           # {vortex_id: int}
        self.last_positions = {}    # {vortex_id: position}

        # T* 事件
        self.initial_count = None
        self.samples = 0
        self.initial_event = None   # 初始采样上的异常（不作为 T*）
        self.event = None           # 初始采样之后的第一次事件 {'t', 'reason', ...}
        self.last_ids = []          # 最近一次采样中各涡旋的编号

    def initialize_vortex_tracking(self, vortex_id: int, degree: int):
        """初始化单个涡旋的追踪状态"""
        if vortex_id not in self.trail_points:
            self.trail_points[vortex_id] = deque(maxlen=self.tracking_config['max_trail_points'])
            self.tracking_active[vortex_id] = True
            self.degrees[vortex_id] = int(degree)
            self.last_positions[vortex_id] = None

    def _match(self, vortices: List[TrackedVortex]) -> List[int]:
        """按弦距离做匈牙利匹配，未匹配到的涡旋分配新编号"""
        active = [vid for vid, on in self.tracking_active.items() if on and self.last_positions[vid] is not None]
        ids = [-1] * len(vortices)
        if active and vortices:
            previous = np.array([self.last_positions[vid] for vid in active])
            current = np.array([v.position for v in vortices])
            cost = np.linalg.norm(previous[:, None] - current[None], axis=2)
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                if self.degrees[active[r]] == vortices[c].degree:
                    ids[c] = active[r]
        next_id = max(self.trail_points.keys(), default=-1) + 1
        for k, vid in enumerate(ids):
            if vid < 0:
                ids[k] = next_id
                next_id += 1
        matched = set(ids)
        for vid in active:
            if vid not in matched:
                self.tracking_active[vid] = False
                logger.debug(f"涡旋 {vid} 丢失")
        return ids

    def update_tracking(self, t: float, vortices: List[TrackedVortex]) -> Optional[Dict[str, Any]]:
        """
        记录一个采样
        Args:
            t: 采样时间
            vortices: 本次检测结果
        Returns:
            本次新出现的 T* 事件；初始采样上的异常记入 initial_event，返回 None
        """
        ids = self._match(vortices)
        self.last_ids = ids
        for vid, vortex in zip(ids, vortices):
            self.initialize_vortex_tracking(vid, vortex.degree)
            self.tracking_active[vid] = True
            self.trail_points[vid].append((float(t), vortex.position.copy()))
            self.last_positions[vid] = vortex.position.copy()

        event = self._detect_event(t, vortices)
        first = self.samples == 0
        self.samples += 1
        if event is None:
            return None
        if first:
            self.initial_event = event
            logger.warning(f"初始采样异常: {event['reason']}")
            return None
        if self.event is None:
            self.event = event
            logger.info(f"T* 事件: t = {t:.6g}，{event['reason']}")
            return event
        return None

    def _detect_event(self, t: float, vortices: List[TrackedVortex]) -> Optional[Dict[str, Any]]:
        total = sum(v.degree for v in vortices)
        if total != self.expected_degree_sum:
            return {'t': float(t), 'reason': 'tracking_failure', 'degree_sum': int(total)}
        # 参照数目取第一个度数和正确的采样
        if self.initial_count is None:
            self.initial_count = len(vortices)
        if len(vortices) != self.initial_count:
            return {'t': float(t), 'reason': 'count_change', 'count': len(vortices)}
        if len(vortices) > 1:
            positions = np.array([v.position for v in vortices])
            gaps = np.linalg.norm(positions[:, None] - positions[None], axis=2)
            gaps[np.diag_indices(len(vortices))] = np.inf
            if gaps.min() < self.merge_radius:
                return {'t': float(t), 'reason': 'collision', 'separation': float(gaps.min())}
        return None

    def get_tracking_status(self) -> Dict[int, Dict]:
        """获取所有涡旋的追踪状态"""
        return {
            vortex_id: {
                'active': self.tracking_active.get(vortex_id, False),
                'degree': self.degrees.get(vortex_id),
                'samples': len(self.trail_points.get(vortex_id, [])),
                'last_position': None if self.last_positions.get(vortex_id) is None
                else self.last_positions[vortex_id].tolist(),
            }
            for vortex_id in self.trail_points.keys()
        }
