"""
有效动力学包
"""

from .compare import ComparisonReport, compare, match_vortices
from .dynamics import (EffectiveState, EffectiveTrajectory, collision_threshold, effective_step, evaluate_state,
                       run_effective)

__all__ = ['EffectiveState', 'EffectiveTrajectory', 'collision_threshold', 'effective_step', 'evaluate_state',
           'run_effective',
           'ComparisonReport', 'compare', 'match_vortices']
