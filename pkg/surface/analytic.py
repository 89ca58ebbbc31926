"""
解析曲面 - 球面、环面、椭球面的隐式描述与闭式几何量
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

import config
from errors import GeometryError


class AnalyticSurface(ABC):
    """以隐函数 f(x) = 0 描述的闭曲面，f 的梯度指向外侧"""

    kind = "analytic"

    @abstractmethod
    def implicit(self, x: np.ndarray) -> np.ndarray:
        """隐函数值 f(x)，x 形状 (k, 3)"""
        pass

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray:
        """∇f，形状 (k, 3)"""
        pass

    @abstractmethod
    def hessian(self, x: np.ndarray) -> np.ndarray:
        """∇²f，形状 (k, 3, 3)"""
        pass

    @abstractmethod
    def project(self, x: np.ndarray) -> np.ndarray:
        """把曲面附近的点投影回曲面"""
        pass

    @abstractmethod
    def gauss_curvature(self, x: np.ndarray) -> np.ndarray:
        """闭式 Gauss 曲率"""
        pass

    @abstractmethod
    def descriptor(self) -> Dict[str, Any]:
        """可写入配置/报告的描述字典"""
        pass

    def normal(self, x: np.ndarray) -> np.ndarray:
        """外单位法向 N = ∇f / |∇f|"""
        g = self.gradient(np.atleast_2d(x))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def shape_operator3(self, x: np.ndarray) -> np.ndarray:
        """
        环境坐标下的形状算子 𝒮 = -∇N = -P H P / |∇f|
        Returns:
            (k, 3, 3) 对称矩阵，作用在切平面上
        """
        x = np.atleast_2d(x)
        g = self.gradient(x)
        gnorm = np.linalg.norm(g, axis=1)
        n = g / gnorm[:, None]
        proj = np.eye(3)[None, :, :] - n[:, :, None] * n[:, None, :]
        h = self.hessian(x)
        return -np.einsum('kij,kjl,klm->kim', proj, h, proj) / gnorm[:, None, None]

    # 以下闭式测地工具只有球面提供
    def exp(self, p: np.ndarray, v: np.ndarray) -> Optional[np.ndarray]:
        return None

    def log(self, p: np.ndarray, q: np.ndarray) -> Optional[np.ndarray]:
        return None

    def distance(self, p: np.ndarray, q: np.ndarray) -> Optional[np.ndarray]:
        return None


class Sphere(AnalyticSurface):
    """半径为 R 的圆球面"""

    kind = "sphere"

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise GeometryError("球面半径必须为正", diagnostic={'radius': radius})
        self.radius = float(radius)

    def implicit(self, x):
        return np.einsum('ij,ij->i', x, x) - self.radius ** 2

    def gradient(self, x):
        return 2.0 * x

    def hessian(self, x):
        return np.broadcast_to(2.0 * np.eye(3), (x.shape[0], 3, 3)).copy()

    def project(self, x):
        x = np.atleast_2d(x)
        return self.radius * x / np.linalg.norm(x, axis=1, keepdims=True)

    def gauss_curvature(self, x):
        return np.full(np.atleast_2d(x).shape[0], 1.0 / self.radius ** 2)

    def descriptor(self):
        return {'kind': self.kind, 'radius': self.radius}

    def exp(self, p, v):
        p = np.atleast_2d(p)
        v = np.atleast_2d(v)
        speed = np.linalg.norm(v, axis=1, keepdims=True)
        angle = speed / self.radius
        direction = np.divide(v, speed, out=np.zeros_like(v), where=speed > 0)
        return np.cos(angle) * p + self.radius * np.sin(angle) * direction

    def log(self, p, q):
        p = np.atleast_2d(p)
        q = np.atleast_2d(q)
        n = p / self.radius
        tangent = q - np.einsum('ij,ij->i', q, n)[:, None] * n
        tnorm = np.linalg.norm(tangent, axis=1, keepdims=True)
        angle = self.distance(p, q)[:, None] / self.radius
        return np.divide(tangent, tnorm, out=np.zeros_like(tangent), where=tnorm > 0) * angle * self.radius

    def distance(self, p, q):
        p = np.atleast_2d(p)
        q = np.atleast_2d(q)
        cross = np.linalg.norm(np.cross(p, q), axis=1)
        dot = np.einsum('ij,ij->i', p, q)
        return self.radius * np.arctan2(cross, dot)


class Torus(AnalyticSurface):
    """绕 z 轴旋转的环面，大半径 R、小半径 r"""

    kind = "torus"

    def __init__(self, major_radius: float = 2.0, minor_radius: float = 0.5):
        if minor_radius <= 0 or major_radius <= minor_radius:
            raise GeometryError("环面半径需满足 R > r > 0",
                                diagnostic={'major_radius': major_radius, 'minor_radius': minor_radius})
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)

    def _rho(self, x):
        return np.hypot(x[:, 0], x[:, 1])

    def implicit(self, x):
        rho = self._rho(x)
        return (rho - self.major_radius) ** 2 + x[:, 2] ** 2 - self.minor_radius ** 2

    def gradient(self, x):
        rho = self._rho(x)
        scale = 2.0 * (1.0 - self.major_radius / rho)
        return np.stack([scale * x[:, 0], scale * x[:, 1], 2.0 * x[:, 2]], axis=1)

    def hessian(self, x):
        R = self.major_radius
        rho = self._rho(x)
        rho3 = rho ** 3
        h = np.zeros((x.shape[0], 3, 3))
        h[:, 0, 0] = 2.0 * (1.0 - R / rho + R * x[:, 0] ** 2 / rho3)
        h[:, 1, 1] = 2.0 * (1.0 - R / rho + R * x[:, 1] ** 2 / rho3)
        h[:, 0, 1] = h[:, 1, 0] = 2.0 * R * x[:, 0] * x[:, 1] / rho3
        h[:, 2, 2] = 2.0
        return h

    def project(self, x):
        x = np.atleast_2d(x)
        rho = self._rho(x)
        ring = np.zeros_like(x)
        ring[:, 0] = self.major_radius * x[:, 0] / rho
        ring[:, 1] = self.major_radius * x[:, 1] / rho
        offset = x - ring
        return ring + self.minor_radius * offset / np.linalg.norm(offset, axis=1, keepdims=True)

    def gauss_curvature(self, x):
        x = np.atleast_2d(x)
        cos_v = (self._rho(x) - self.major_radius) / self.minor_radius
        return cos_v / (self.minor_radius * (self.major_radius + self.minor_radius * cos_v))

    def descriptor(self):
        return {'kind': self.kind, 'major_radius': self.major_radius, 'minor_radius': self.minor_radius}


class Ellipsoid(AnalyticSurface):
    """半轴为 (a, b, c) 的椭球面"""

    kind = "ellipsoid"

    def __init__(self, axes=(1.0, 1.0, 1.5)):
        axes = np.asarray(axes, dtype=float)
        if axes.shape != (3,) or np.any(axes <= 0):
            raise GeometryError("椭球半轴必须是三个正数", diagnostic={'axes': axes})
        self.axes = axes
        self._inv2 = 1.0 / axes ** 2

    def implicit(self, x):
        return (x ** 2 * self._inv2).sum(axis=1) - 1.0

    def gradient(self, x):
        return 2.0 * x * self._inv2

    def hessian(self, x):
        return np.broadcast_to(np.diag(2.0 * self._inv2), (x.shape[0], 3, 3)).copy()

    def project(self, x):
        """最近点投影：对 t 解 Σ a_i² y_i² / (a_i² + t)² = 1"""
        y = np.atleast_2d(x)
        a2 = self.axes ** 2
        t = np.zeros(y.shape[0])
        t_min = -a2.min() * (1.0 - 1e-12)
        iterations = config.SURFACE_CONFIG.get('ellipsoid_newton_iterations', 50)
        for _ in range(iterations):
            denom = a2[None, :] + t[:, None]
            q = a2[None, :] * y ** 2 / denom ** 2
            g = q.sum(axis=1) - 1.0
            dg = -2.0 * (q / denom).sum(axis=1)
            step = g / dg
            t = np.maximum(t - step, 0.5 * (t + t_min))
            if np.max(np.abs(step)) < 1e-15 * (1.0 + np.max(np.abs(t))):
                break
        return a2[None, :] * y / (a2[None, :] + t[:, None])

    def gauss_curvature(self, x):
        x = np.atleast_2d(x)
        a2b2c2 = np.prod(self.axes ** 2)
        s = (x ** 2 * self._inv2 ** 2).sum(axis=1)
        return 1.0 / (a2b2c2 * s ** 2)

    def descriptor(self):
        return {'kind': self.kind, 'axes': self.axes.tolist()}
