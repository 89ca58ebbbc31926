"""
曲面上下文 - 把几何、DEC 算子、联络与调和基打包，供重整化能量各步骤共享
"""

from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import scipy.sparse as sp

from dec.harmonic import HarmonicBasis, harmonic_basis
from dec.homology import HomologyLoops, homology_generators
from dec.operators import DEC, PinnedSolver
from fields.connection import Connection, levi_civita
from logger_config import setup_logger
from surface.base import SurfaceGeometry, SurfacePoint

logger = setup_logger(__name__)


class SurfaceContext:
    """
    一个曲面上所有只读的预计算结果
    Args:
        geom: 曲面几何
        dec_params: 覆盖 config.DEC_CONFIG 的参数
    """

    def __init__(self, geom: SurfaceGeometry, dec_params: Optional[Dict[str, Any]] = None):
        self.geom = geom
        self.dec = DEC(geom, dec_params)
        self.conn: Connection = levi_civita(geom)
        self.loops: HomologyLoops = homology_generators(geom, params=dec_params)
        self.basis: HarmonicBasis = harmonic_basis(self.dec, self.loops)
        logger.info(f"曲面上下文就绪: {geom.name}，χ={geom.euler_characteristic()}，"
                    f"调和维数 {self.basis.dimension}")

    @property
    def cell(self) -> float:
        """网格单元尺度 h（平均边长）"""
        return self.geom.mean_edge_length

    @property
    def genus(self) -> int:
        return self.geom.genus()

    @property
    def harmonic_dimension(self) -> int:
        return self.basis.dimension

    @cached_property
    def basis_face_vectors(self) -> np.ndarray:
        """(2𝔤, F, 3) 调和基的逐面向量"""
        return self.basis.face_vectors()

    @cached_property
    def vertex_face_weights(self):
        """(V, F) 稀疏面积平均算子，把逐面向量平均到顶点"""
        geom = self.geom
        rows = geom.faces.ravel()
        cols = np.repeat(np.arange(geom.n_faces), 3)
        data = np.repeat(geom.face_areas, 3)
        matrix = sp.csr_matrix((data, (rows, cols)), shape=(geom.n_vertices, geom.n_faces))
        totals = np.asarray(matrix.sum(axis=1)).ravel()
        return sp.diags(1.0 / totals) @ matrix

    @cached_property
    def face_solver(self) -> PinnedSolver:
        """d1 d1ᵀ（对偶图 Laplace，核为常数）的求解器"""
        d1 = self.dec.d1
        return PinnedSolver(d1 @ d1.T, pin=0, refinement_steps=self.dec.params['refinement_steps'])

    def closing_correction(self, mismatch: np.ndarray) -> np.ndarray:
        """最小欧氏范数的 1-上链 y，使 d1 y = mismatch（先减去均值）"""
        mismatch = np.asarray(mismatch, dtype=float)
        lam = self.face_solver.solve(mismatch - mismatch.mean())
        return self.dec.d1.T @ lam

    # ------------------------------------------------------------------
    # 电流的逐面 / 逐边 / 逐顶点表示
    # ------------------------------------------------------------------
    def harmonic_face_vectors(self, coefficients: np.ndarray) -> np.ndarray:
        """ξ = Σ c_m ζ_m 的逐面向量"""
        geom = self.geom
        if self.harmonic_dimension == 0:
            return np.zeros((geom.n_faces, 3))
        return np.einsum('m,mfd->fd', np.asarray(coefficients, dtype=float), self.basis_face_vectors)

    def edge_form(self, face_vectors: np.ndarray) -> np.ndarray:
        """逐面向量 → 边上的 1-形式（两侧面向量平均后与边向量点乘）"""
        geom = self.geom
        mean = 0.5 * (face_vectors[geom.edge_faces[:, 0]] + face_vectors[geom.edge_faces[:, 1]])
        tangent = geom.vertices[geom.edges[:, 1]] - geom.vertices[geom.edges[:, 0]]
        return np.einsum('ed,ed->e', mean, tangent)

    def vertex_vectors(self, face_vectors: np.ndarray) -> np.ndarray:
        """逐面向量面积加权平均到顶点，再投影到顶点切平面"""
        vectors = self.vertex_face_weights @ face_vectors
        n = self.geom.vertex_normals
        return vectors - np.einsum('ij,ij->i', vectors, n)[:, None] * n

    # ------------------------------------------------------------------
    # 涡旋邻域
    # ------------------------------------------------------------------
    def point_vertices(self, points: Iterable[SurfacePoint]) -> np.ndarray:
        """各点所在面片的顶点"""
        faces = [int(p.face) for p in points]
        if not faces:
            return np.zeros(0, dtype=np.int64)
        return np.unique(self.geom.faces[faces].ravel())

    def vertex_rings(self, seeds: np.ndarray, rings: int) -> np.ndarray:
        """种子顶点向外扩张 rings 环后的布尔掩码"""
        mask = np.zeros(self.geom.n_vertices, dtype=bool)
        mask[np.asarray(seeds, dtype=np.int64)] = True
        adjacency = self.geom.vertex_adjacency
        for _ in range(int(rings)):
            mask = mask | (adjacency @ mask.astype(float) > 0)
        return mask

    def neighborhood(self, points: List[SurfacePoint], rings: int) -> np.ndarray:
        """涡旋所在面片顶点外扩 rings 环后的顶点编号"""
        if not points:
            return np.zeros(0, dtype=np.int64)
        return np.nonzero(self.vertex_rings(self.point_vertices(points), rings))[0]
