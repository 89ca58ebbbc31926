"""
离散外微分算子 - 外微分、对角 Hodge 星、余微分、Laplace 求解与 Hodge 分解
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

import config
from errors import CompatibilityError, DECError
from logger_config import setup_logger
from surface.base import SurfaceGeometry

logger = setup_logger(__name__)


class PinnedSolver:
    """
    半正定奇异系统（核为常数）的求解器：固定一个未知量为 0 后做 LU 分解，
    再在完整系统上做迭代精化
    Args:
        matrix: 对称半正定稀疏矩阵，核为常向量
        pin: 被固定的未知量编号
        refinement_steps: 迭代精化步数
    """

    def __init__(self, matrix: sp.spmatrix, pin: int = 0, refinement_steps: int = 3):
        self.matrix = sp.csr_matrix(matrix)
        n = self.matrix.shape[0]
        self.pin = int(pin)
        self.keep = np.delete(np.arange(n), self.pin)
        reduced = self.matrix[self.keep][:, self.keep].tocsc()
        try:
            self.lu = splu(reduced)
        except RuntimeError as e:
            raise DECError(f"稀疏 LU 分解失败: {e}", diagnostic={'size': n})
        self.refinement_steps = refinement_steps

    def _solve_once(self, rhs: np.ndarray) -> np.ndarray:
        x = np.zeros(self.matrix.shape[0])
        x[self.keep] = self.lu.solve(rhs[self.keep])
        return x

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """求解 A x = rhs（rhs 需与核正交），返回 x[pin] = 0 的解"""
        rhs = np.asarray(rhs, dtype=float)
        x = self._solve_once(rhs)
        for _ in range(self.refinement_steps):
            x += self._solve_once(rhs - self.matrix @ x)
        return x


@dataclass
class HodgeDecomposition:
    """j = dθ + d*β + ξ 的三个分量"""

    theta: np.ndarray       # 0-形式，零均值
    beta: np.ndarray        # 2-形式（面积分值），总和为零
    xi: np.ndarray          # 调和 1-形式
    exact: np.ndarray       # dθ
    coexact: np.ndarray     # d*β
    residual: float         # 余恰当部分的相对残差


class DEC:
    """
    网格上的低阶离散外微分
    星算子为对角阵：star0 = 重心对偶面积，star1 = 余切权重，star2 = 1/面积
    Args:
        geom: 曲面几何
        params: 覆盖 config.DEC_CONFIG 的参数
    """

    def __init__(self, geom: SurfaceGeometry, params: Optional[Dict[str, Any]] = None):
        self.geom = geom
        self.params = {**config.DEC_CONFIG, **(params or {})}
        n_v, n_e, n_f = geom.n_vertices, geom.n_edges, geom.n_faces
        e = np.arange(n_e)
        self.d0 = sp.csr_matrix((np.concatenate([-np.ones(n_e), np.ones(n_e)]),
                                 (np.concatenate([e, e]), np.concatenate([geom.edges[:, 0], geom.edges[:, 1]]))),
                                shape=(n_e, n_v))
        rows = np.repeat(np.arange(n_f), 3)
        self.d1 = sp.csr_matrix((geom.face_edge_signs.ravel().astype(float), (rows, geom.face_edges.ravel())),
                                shape=(n_f, n_e))
        self.star0 = geom.vertex_areas.copy()
        self.star1 = geom.edge_weights.copy()
        self.star2 = 1.0 / geom.face_areas
        self.stiffness = (self.d0.T @ sp.diags(self.star1) @ self.d0).tocsr()
        self.stiffness.sum_duplicates()
        if np.any(self.star1 == 0):
            logger.warning(f"{int(np.sum(self.star1 == 0))} 条边余切权重为零，d*β 在这些边上未定义")

    # ------------------------------------------------------------------
    # 外微分与余微分
    # ------------------------------------------------------------------
    def _check(self, cochain: np.ndarray, size: int, kind: str) -> np.ndarray:
        cochain = np.asarray(cochain, dtype=float)
        if cochain.shape != (size,):
            raise DECError(f"{kind} 尺寸不匹配", diagnostic={'expected': size, 'got': list(cochain.shape)})
        return cochain

    def apply_d0(self, alpha: np.ndarray) -> np.ndarray:
        """0-形式 → 1-形式"""
        return self.d0 @ self._check(alpha, self.geom.n_vertices, "0-形式")

    def apply_d1(self, beta: np.ndarray) -> np.ndarray:
        """1-形式 → 2-形式"""
        return self.d1 @ self._check(beta, self.geom.n_edges, "1-形式")

    def delta1(self, beta: np.ndarray) -> np.ndarray:
        """1-形式的余微分 star0⁻¹ d0ᵀ star1 β（0-形式）"""
        beta = self._check(beta, self.geom.n_edges, "1-形式")
        return (self.d0.T @ (self.star1 * beta)) / self.star0

    def delta2(self, gamma: np.ndarray) -> np.ndarray:
        """2-形式的余微分 star1⁻¹ d1ᵀ star2 γ（1-形式；零权重边上取 0）"""
        gamma = self._check(gamma, self.geom.n_faces, "2-形式")
        flux = self.d1.T @ (self.star2 * gamma)
        return np.divide(flux, self.star1, out=np.zeros_like(flux), where=self.star1 != 0)

    def inner0(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(self.star0 * a, b))

    def inner1(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(self.star1 * a, b))

    def inner2(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(self.star2 * a, b))

    def mean0(self, alpha: np.ndarray) -> float:
        """面积加权均值"""
        return float(np.dot(self.star0, alpha) / self.star0.sum())

    # ------------------------------------------------------------------
    # 求解
    # ------------------------------------------------------------------
    @cached_property
    def laplace_solver(self) -> PinnedSolver:
        return PinnedSolver(self.stiffness, pin=0, refinement_steps=self.params['refinement_steps'])

    @cached_property
    def face_solver(self) -> PinnedSolver:
        """d1 d1ᵀ（面图 Laplace），用于余恰当分量"""
        return PinnedSolver(self.d1 @ self.d1.T, pin=0, refinement_steps=self.params['refinement_steps'])

    def poisson_solve_0form(self, rhs: np.ndarray) -> np.ndarray:
        """
        求解 −Δu = rhs，rhs 为对偶胞上的积分值（总和须为零）
        Returns:
            面积加权零均值的 0-形式
        Raises:
            CompatibilityError: rhs 总和不为零
        """
        rhs = self._check(rhs, self.geom.n_vertices, "Poisson 右端项")
        total = float(rhs.sum())
        scale = float(np.abs(rhs).sum())
        if abs(total) > self.params['compatibility_tol'] * max(scale, 1.0):
            raise CompatibilityError("Poisson 右端项总积分不为零", diagnostic={'defect': total, 'scale': scale})
        if scale == 0.0:
            return np.zeros_like(rhs)
        u = self.laplace_solver.solve(rhs - total / rhs.size)
        u -= self.mean0(u)
        residual = np.linalg.norm(self.stiffness @ u - rhs) / np.linalg.norm(rhs)
        if residual > self.params['solver_tol']:
            logger.warning(f"Poisson 求解相对残差 {residual:.3e} 超过容差")
        return u

    def green_function(self, y: int) -> np.ndarray:
        """Green 函数列 G(·, y)：−ΔG = δ_y − 1/Vol，零均值"""
        if not 0 <= int(y) < self.geom.n_vertices:
            raise DECError("顶点编号越界", diagnostic={'vertex': int(y)})
        rhs = -self.star0 / self.star0.sum()
        rhs[int(y)] += 1.0
        return self.poisson_solve_0form(rhs)

    def hodge_decompose(self, j: np.ndarray, basis=None) -> HodgeDecomposition:
        """
        Hodge 分解 j = dθ + d*β + ξ
        Args:
            j: 1-形式
            basis: HarmonicBasis（亏格 0 时可省略）
        """
        j = self._check(j, self.geom.n_edges, "1-形式")
        theta = self.poisson_solve_0form(self.d0.T @ (self.star1 * j))
        exact = self.d0 @ theta
        xi = basis.project(j) if basis is not None and basis.dimension > 0 else np.zeros_like(j)
        coexact = j - exact - xi
        # star1 c = d1ᵀ μ，避免除以可能为零的余切权重
        target = self.star1 * coexact
        mu = self.face_solver.solve(self.d1 @ target)
        flux = self.d1.T @ mu
        scale = max(np.linalg.norm(self.star1 * j), 1e-300)
        residual = float(np.linalg.norm(flux - target) / scale)
        mu_mean = np.dot(self.geom.face_areas, mu) / self.geom.face_areas.sum()
        beta = self.geom.face_areas * (mu - mu_mean)
        return HodgeDecomposition(theta=theta, beta=beta, xi=xi, exact=exact, coexact=coexact, residual=residual)

    def face_gradient(self, alpha: np.ndarray) -> np.ndarray:
        """0-形式的逐面线性插值梯度 (F, 3)"""
        geom = self.geom
        v, f = geom.vertices, geom.faces
        n = geom.face_normals
        grad = np.zeros((geom.n_faces, 3))
        for k in range(3):
            # 对边旋转 90° 后除以 2A 是重心坐标梯度
            opposite = v[f[:, (k + 2) % 3]] - v[f[:, (k + 1) % 3]]
            grad += alpha[f[:, k], None] * np.cross(n, opposite)
        return grad / (2.0 * geom.face_areas[:, None])
