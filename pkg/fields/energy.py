"""
场能量 - 协变 Dirichlet 能、外在项、势能，以及粗糙 Laplace 算子
"""

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from errors import FieldError
from fields.connection import Connection
from fields.tangent import TangentField, shape_apply
from surface.base import SurfaceGeometry


@dataclass
class EnergyBreakdown:
    """F_ε^extr 的三个部分"""

    dirichlet: float
    extrinsic: float
    potential: float

    @property
    def total(self) -> float:
        return self.dirichlet + self.extrinsic + self.potential

    @property
    def intrinsic(self) -> float:
        """F_ε^intr = total − extrinsic"""
        return self.dirichlet + self.potential

    def to_dict(self) -> dict:
        record = asdict(self)
        record['total'] = self.total
        return record


def covariant_stiffness(n_vertices: int, edges: np.ndarray, weights: np.ndarray, angles: np.ndarray) -> sp.csr_matrix:
    """
    Hermite 协变刚度阵 K：E_D = ½ Σ_e w |z_i − e^{ir} z_j|² = ½ Re zᴴKz
    """
    i, j = edges[:, 0], edges[:, 1]
    off = -weights * np.exp(1j * angles)
    diag = np.bincount(i, weights=weights, minlength=n_vertices) + np.bincount(j, weights=weights, minlength=n_vertices)
    rows = np.concatenate([i, j, np.arange(n_vertices)])
    cols = np.concatenate([j, i, np.arange(n_vertices)])
    data = np.concatenate([off, np.conj(off), diag.astype(complex)])
    return sp.csr_matrix((data, (rows, cols)), shape=(n_vertices, n_vertices))


def covariant_stiffness_for(conn: Connection) -> sp.csr_matrix:
    geom = conn.geom
    return covariant_stiffness(geom.n_vertices, geom.edges, geom.edge_weights, conn.angles)


def real_block(matrix: sp.spmatrix) -> sp.csr_matrix:
    """复矩阵 → 交错实表示，复数 a+ib 变为 [[a, −b], [b, a]]"""
    coo = sp.coo_matrix(matrix)
    a, b = coo.data.real, coo.data.imag
    r, c = coo.row, coo.col
    rows = np.concatenate([2 * r, 2 * r, 2 * r + 1, 2 * r + 1])
    cols = np.concatenate([2 * c, 2 * c + 1, 2 * c, 2 * c + 1])
    data = np.concatenate([a, -b, b, a])
    n = 2 * matrix.shape[0]
    return sp.csr_matrix((data, (rows, cols)), shape=(n, 2 * matrix.shape[1]))


def shape_square_blocks(geom: SurfaceGeometry) -> sp.csr_matrix:
    """块对角阵 diag(A_v 𝒮_v²)，交错实表示"""
    squares = np.einsum('kij,kjl->kil', geom.shape_ops, geom.shape_ops) * geom.vertex_areas[:, None, None]
    return sp.block_diag(list(squares), format='csr')


def to_real(z: np.ndarray) -> np.ndarray:
    """复向量 → 交错实向量"""
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def from_real(x: np.ndarray) -> np.ndarray:
    return x[0::2] + 1j * x[1::2]


def dirichlet_energy(conn: Connection, u: TangentField) -> float:
    """½∫|Du|²"""
    geom = conn.geom
    z = u.values
    diff = z[geom.edges[:, 0]] - conn.transport_to_low(z[geom.edges[:, 1]])
    return float(0.5 * np.dot(geom.edge_weights, np.abs(diff) ** 2))


def extrinsic_energy(geom: SurfaceGeometry, u: TangentField) -> float:
    """½∫|𝒮u|²"""
    return float(0.5 * np.dot(geom.vertex_areas, np.abs(shape_apply(geom, u).values) ** 2))


def potential_energy(geom: SurfaceGeometry, u: TangentField, epsilon: float) -> float:
    """(1/4ε²)∫(|u|² − 1)²"""
    return float(np.dot(geom.vertex_areas, (np.abs(u.values) ** 2 - 1.0) ** 2) / (4.0 * epsilon ** 2))


def energy(geom: SurfaceGeometry, conn: Connection, u: TangentField, epsilon: float,
           model: str = 'extrinsic') -> EnergyBreakdown:
    """
    F_ε 的分解；model='intrinsic' 时外在项记为 0
    """
    if epsilon <= 0:
        raise FieldError("ε 必须为正", diagnostic={'epsilon': epsilon})
    extrinsic = extrinsic_energy(geom, u) if model == 'extrinsic' else 0.0
    return EnergyBreakdown(dirichlet=dirichlet_energy(conn, u), extrinsic=extrinsic,
                           potential=potential_energy(geom, u, epsilon))


def surface_gradient_energy(geom: SurfaceGeometry, u: TangentField, stiffness: sp.spmatrix) -> float:
    """
    ½∫|∇_s u|²：把场看作三个环境分量，用标量余切刚度阵独立组装
    Args:
        stiffness: 标量刚度阵 d0ᵀ star1 d0
    """
    ambient = u.to_ambient(geom)
    return float(0.5 * sum(ambient[:, k] @ (stiffness @ ambient[:, k]) for k in range(3)))


def rough_laplacian_apply(conn: Connection, u: TangentField) -> TangentField:
    """Δ_g u = −M⁻¹ K u"""
    geom = conn.geom
    return TangentField(-(covariant_stiffness_for(conn) @ u.values) / geom.vertex_areas)
