"""
GL 流包
"""

from .gl_flow import FlowConfig, FlowState, GLFlowSolver, run, step
from .initial import core_cutoff, prepare_initial
from .trajectory import FlowSample, FlowTrajectory, excess_energy, flux_coefficients, flux_series
from .trajectory_tracker import VortexTrajectoryTracker
from .vortex_tracker import TrackedVortex, degree_sum, track_vortices

__all__ = ['FlowConfig', 'FlowState', 'GLFlowSolver', 'run', 'step', 'prepare_initial', 'core_cutoff',
           'FlowSample', 'FlowTrajectory', 'flux_series', 'flux_coefficients', 'excess_energy',
           'VortexTrajectoryTracker', 'TrackedVortex', 'track_vortices', 'degree_sum']
