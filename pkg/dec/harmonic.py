"""
调和 1-形式基 - 由对偶闭链去掉恰当部分后正交化
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from dec.homology import HomologyLoops, homology_generators
from dec.operators import DEC
from errors import DECError
from logger_config import setup_logger

logger = setup_logger(__name__)


@dataclass
class HarmonicBasis:
    """
    Harm¹(M) 的 L² 正交归一基
    forms: (2𝔤, E) 每行一个调和 1-形式
    """

    dec: DEC
    forms: np.ndarray
    residuals: np.ndarray

    @property
    def dimension(self) -> int:
        return self.forms.shape[0]

    def coefficients(self, j: np.ndarray) -> np.ndarray:
        """⟨j, ζ_m⟩ 投影系数"""
        if self.dimension == 0:
            return np.zeros(0)
        return self.forms @ (self.dec.star1 * j)

    def combine(self, coefficients: np.ndarray) -> np.ndarray:
        """Σ c_m ζ_m"""
        if self.dimension == 0:
            return np.zeros(self.dec.geom.n_edges)
        return np.asarray(coefficients, dtype=float) @ self.forms

    def project(self, j: np.ndarray) -> np.ndarray:
        """P_H(j)"""
        return self.combine(self.coefficients(j))

    def face_vectors(self) -> np.ndarray:
        """
        每个基元素在每个面上的常向量表示（三条边上的最小二乘拟合）
        Returns:
            (2𝔤, F, 3)
        """
        return np.stack([edge_form_to_face_vectors(self.dec, form) for form in self.forms]) \
            if self.dimension else np.zeros((0, self.dec.geom.n_faces, 3))


def edge_form_to_face_vectors(dec: DEC, form: np.ndarray) -> np.ndarray:
    """
    1-形式 → 面内常向量 X_f，使 X_f·(p_b − p_a) 在三条半边上最小二乘逼近形式值
    """
    geom = dec.geom
    v, f = geom.vertices, geom.faces
    edges = np.stack([v[f[:, (k + 1) % 3]] - v[f[:, k]] for k in range(3)], axis=1)      # (F, 3, 3)
    values = geom.face_edge_signs * form[geom.face_edges]                                # (F, 3)
    n = geom.face_normals
    # 在面内二维基下解最小二乘
    t1 = edges[:, 0] / np.linalg.norm(edges[:, 0], axis=1, keepdims=True)
    t2 = np.cross(n, t1)
    a = np.stack([np.einsum('fkd,fd->fk', edges, t1), np.einsum('fkd,fd->fk', edges, t2)], axis=2)  # (F, 3, 2)
    ata = np.einsum('fki,fkj->fij', a, a)
    atb = np.einsum('fki,fk->fi', a, values)
    coef = np.linalg.solve(ata, atb[..., None])[..., 0]
    return coef[:, 0, None] * t1 + coef[:, 1, None] * t2


def harmonic_basis(dec: DEC, loops: Optional[HomologyLoops] = None) -> HarmonicBasis:
    """
    计算调和基：对偶闭链 ω 减去恰当部分 dα（Kα = d0ᵀ star1 ω），再按 star1 内积正交化
    Raises:
        DECError: 残差 ‖dζ‖ + ‖d*ζ‖ 超过容差
    """
    geom = dec.geom
    if geom.genus() == 0:
        return HarmonicBasis(dec=dec, forms=np.zeros((0, geom.n_edges)), residuals=np.zeros(0))
    loops = homology_generators(geom) if loops is None else loops
    forms = []
    for omega in loops.dual_cycles:
        alpha = dec.poisson_solve_0form(dec.d0.T @ (dec.star1 * omega))
        zeta = omega - dec.d0 @ alpha
        for prev in forms:
            zeta = zeta - dec.inner1(zeta, prev) * prev
        norm = np.sqrt(max(dec.inner1(zeta, zeta), 0.0))
        if norm < 1e-12:
            raise DECError("调和基线性相关", diagnostic={'index': len(forms)})
        forms.append(zeta / norm)
    forms = np.asarray(forms)

    tol = dec.params['harmonic_tol']
    residuals = np.zeros(forms.shape[0])
    for m, zeta in enumerate(forms):
        closed = np.linalg.norm(dec.d1 @ zeta)
        coclosed = np.linalg.norm(dec.d0.T @ (dec.star1 * zeta))
        residuals[m] = closed + coclosed
    if np.any(residuals > tol):
        raise DECError("调和基残差超过容差", diagnostic={'residuals': residuals, 'tol': tol})
    logger.debug(f"调和基维数 {forms.shape[0]}，最大残差 {residuals.max():.2e}")
    return HarmonicBasis(dec=dec, forms=forms, residuals=residuals)
