"""
离散外微分包
"""

from .harmonic import HarmonicBasis, harmonic_basis
from .homology import HomologyLoops, homology_generators, loop_integral
from .operators import DEC, HodgeDecomposition, PinnedSolver

__all__ = ['DEC', 'PinnedSolver', 'HodgeDecomposition', 'HarmonicBasis', 'harmonic_basis',
           'HomologyLoops', 'homology_generators', 'loop_integral']
