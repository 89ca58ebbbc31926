"""
切向量场包
"""

from .connection import Connection, levi_civita
from .energy import EnergyBreakdown, energy, rough_laplacian_apply
from .tangent import TangentField, complex_rotate, current_j, shape_apply, shape_apply2, vorticity

__all__ = ['Connection', 'levi_civita', 'EnergyBreakdown', 'energy', 'rough_laplacian_apply',
           'TangentField', 'complex_rotate', 'current_j', 'shape_apply', 'shape_apply2', 'vorticity']
