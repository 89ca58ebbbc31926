"""
重整化能量包
Ψ、周期约束、典范调和场、W^intr、𝒢 与 θ、∇W、核能量 γ
"""

from .canonical import CanonicalField, canonical_field, current_residual
from .constraint import PeriodConstraint, admissible_xi, period_constraint, xi_update
from .context import SurfaceContext
from .core_energy import CoreEnergy, CoreProfile, core_energy, core_profile
from .extrinsic import ThetaSolution, g_functional, theta_critical
from .gradient import fd_gradient_G, fd_gradient_W, grad_W
from .intrinsic import IntrinsicValue, feasible_separation, w_intrinsic
from .model import (Evaluation, RenormalizedValue, VortexConfiguration, VortexEnergyModel,
                    point_from_record, renormalized_W)
from .psi import PsiSolution, check_admissible, solve_psi

__all__ = [
    'SurfaceContext',
    'PsiSolution',
    'check_admissible',
    'solve_psi',
    'PeriodConstraint',
    'period_constraint',
    'admissible_xi',
    'xi_update',
    'CanonicalField',
    'canonical_field',
    'current_residual',
    'IntrinsicValue',
    'w_intrinsic',
    'feasible_separation',
    'ThetaSolution',
    'g_functional',
    'theta_critical',
    'grad_W',
    'fd_gradient_W',
    'fd_gradient_G',
    'VortexConfiguration',
    'RenormalizedValue',
    'Evaluation',
    'VortexEnergyModel',
    'point_from_record',
    'renormalized_W',
    'CoreEnergy',
    'CoreProfile',
    'core_energy',
    'core_profile',
]
