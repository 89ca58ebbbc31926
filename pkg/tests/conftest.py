"""
测试夹具 - 会话级共享的曲面与上下文（构造一次，多个测试复用）
"""

import numpy as np
import pytest

from renormalized.context import SurfaceContext
from surface.builders import ellipsoid, icosphere, torus


@pytest.fixture(scope="session")
def sphere():
    """单位球面，642 个顶点"""
    return icosphere(refine=3)


@pytest.fixture(scope="session")
def sphere_ctx(sphere):
    return SurfaceContext(sphere)


@pytest.fixture(scope="session")
def small_sphere():
    """162 个顶点，用于稠密矩阵对照"""
    return icosphere(refine=2)


@pytest.fixture(scope="session")
def torus_mesh():
    return torus(2.0, 0.5, nu=32, nv=16)


@pytest.fixture(scope="session")
def torus_ctx(torus_mesh):
    return SurfaceContext(torus_mesh)


@pytest.fixture(scope="session")
def ellipsoid_mesh():
    return ellipsoid((1.0, 1.0, 1.5), refine=3)


@pytest.fixture(scope="session")
def ellipsoid_ctx(ellipsoid_mesh):
    return SurfaceContext(ellipsoid_mesh)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def poles(geom, height=1.0):
    """南北极两个点"""
    return [geom.make_point(np.array([0.0, 0.0, height])), geom.make_point(np.array([0.0, 0.0, -height]))]


def on_great_circle(geom, angle):
    """xz 平面大圆上与北极夹角为 angle 的点"""
    return geom.make_point(np.array([np.sin(angle), 0.0, np.cos(angle)]))
