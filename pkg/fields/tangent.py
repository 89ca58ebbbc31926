"""
切向量场 - 顶点标架下的复坐标表示、复结构 i、形状算子作用、电流与涡度
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

import config
from errors import FieldError
from fields.connection import Connection
from surface.base import SurfaceGeometry


@dataclass
class TangentField:
    """z_v = (u·e1) + i(u·e2)"""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1:
            raise FieldError("切向量场必须是一维复数组", diagnostic={'shape': list(self.values.shape)})
        if not np.all(np.isfinite(self.values)):
            raise FieldError("切向量场含非有限值")

    def __len__(self) -> int:
        return self.values.size

    def norms(self) -> np.ndarray:
        return np.abs(self.values)

    def max_norm(self) -> float:
        return float(np.abs(self.values).max())

    def copy(self) -> "TangentField":
        return TangentField(self.values.copy())

    def rotate(self, phase: Union[float, np.ndarray]) -> "TangentField":
        """e^{iα} u，α 为常数或 0-形式"""
        return TangentField(np.exp(1j * np.asarray(phase)) * self.values)

    def to_ambient(self, geom: SurfaceGeometry) -> np.ndarray:
        """R³ 向量 (V, 3)"""
        return self.values.real[:, None] * geom.frame_e1 + self.values.imag[:, None] * geom.frame_e2

    @classmethod
    def from_ambient(cls, geom: SurfaceGeometry, vectors: np.ndarray) -> "TangentField":
        """把 R³ 向量投影到顶点标架"""
        a = np.einsum('ij,ij->i', vectors, geom.frame_e1)
        b = np.einsum('ij,ij->i', vectors, geom.frame_e2)
        return cls(a + 1j * b)


def complex_rotate(u: TangentField) -> TangentField:
    """复结构 i：逐点乘以虚数单位"""
    return TangentField(1j * u.values)


def pointwise_inner(u: TangentField, v: TangentField) -> np.ndarray:
    """(u, v)_g 逐点内积 Re(conj(u) v)"""
    return (np.conj(u.values) * v.values).real


def _apply_matrices(mats: np.ndarray, z: np.ndarray) -> np.ndarray:
    a, b = z.real, z.imag
    return (mats[:, 0, 0] * a + mats[:, 0, 1] * b) + 1j * (mats[:, 1, 0] * a + mats[:, 1, 1] * b)


def shape_apply(geom: SurfaceGeometry, u: TangentField) -> TangentField:
    """𝒮u"""
    return TangentField(_apply_matrices(geom.shape_ops, u.values))


def shape_apply2(geom: SurfaceGeometry, u: TangentField) -> TangentField:
    """𝒮²u"""
    squares = np.einsum('kij,kjl->kil', geom.shape_ops, geom.shape_ops)
    return TangentField(_apply_matrices(squares, u.values))


def current_j(u: TangentField, conn: Connection,
              params: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    电流 j(u) = (Du, iu) 的离散 1-形式
    两端均为单位向量时取 conj(z_i)e^{ir}z_j 的主值辐角（保证量子化精确），
    否则取 Im(·)/max(|z_i||z_j|, floor)
    Returns:
        (j (E,), flagged (E,) 两端都几乎为零的边)
    """
    params = {**config.FIELD_CONFIG, **(params or {})}
    geom = conn.geom
    z = u.values
    if z.size != geom.n_vertices:
        raise FieldError("场的长度与顶点数不符", diagnostic={'values': z.size, 'vertices': geom.n_vertices})
    zi = z[geom.edges[:, 0]]
    zj = z[geom.edges[:, 1]]
    t = np.conj(zi) * conn.transport_to_low(zj)
    ni, nj = np.abs(zi), np.abs(zj)
    floor = params['current_floor']
    unit_tol = params['unit_tol']
    unit = (np.abs(ni - 1.0) <= unit_tol) & (np.abs(nj - 1.0) <= unit_tol)
    flagged = (ni < floor) & (nj < floor)
    j = np.where(unit, np.angle(t), t.imag / np.maximum(ni * nj, floor))
    j[flagged] = 0.0
    return j, flagged


def vorticity(u: TangentField, conn: Connection, params: Optional[Dict[str, Any]] = None) -> np.ndarray:
    """ω(u) = d j(u) + κ vol_g，逐面值"""
    geom = conn.geom
    j, _ = current_j(u, conn, params)
    return (geom.face_edge_signs * j[geom.face_edges]).sum(axis=1) + conn.holonomy
