"""
曲面几何包
"""

from .analytic import AnalyticSurface, Ellipsoid, Sphere, Torus
from .base import SurfaceGeometry, SurfacePoint
from .builders import double_torus, ellipsoid, icosphere, load_or_build, torus
from .geodesic import distance_field, exp_map, geodesic_distance, log_map

__all__ = ['AnalyticSurface', 'Sphere', 'Torus', 'Ellipsoid', 'SurfaceGeometry', 'SurfacePoint',
           'icosphere', 'ellipsoid', 'torus', 'double_torus', 'load_or_build',
           'exp_map', 'log_map', 'geodesic_distance', 'distance_field']
