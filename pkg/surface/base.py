"""
曲面几何基类 - 网格校验、拓扑、度量、法向、标架、形状算子与点定位
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

import config
from errors import GeometryError
from logger_config import setup_logger
from surface.analytic import AnalyticSurface
from surface.mesh_utils import MeshUtils

logger = setup_logger(__name__)


@dataclass
class SurfacePoint:
    """曲面上的点：所在面片 + 重心坐标，必要时附带顶点编号"""

    face: int
    bary: np.ndarray
    position: np.ndarray
    vertex: Optional[int] = None

    def __post_init__(self):
        self.bary = np.asarray(self.bary, dtype=float)
        self.position = np.asarray(self.position, dtype=float)
        if self.bary.shape != (3,) or np.any(self.bary < -1e-12) or abs(self.bary.sum() - 1.0) > 1e-9:
            raise GeometryError("重心坐标必须非负且和为 1", diagnostic={'bary': self.bary})

    def to_record(self) -> dict:
        """JSON 兼容记录（重心形式）"""
        record = {'face': int(self.face), 'bary': self.bary.tolist(), 'position': self.position.tolist()}
        if self.vertex is not None:
            record['vertex'] = int(self.vertex)
        return record


@dataclass(eq=False)
class SurfaceGeometry:
    """
    闭合定向三角网格（可带解析曲面描述）
    构造后不可变；所有派生量在构造时或首次访问时计算
    Args:
        vertices: (V, 3) 顶点坐标
        faces: (F, 3) 顶点索引
        analytic: 可选的解析曲面，提供闭式法向与形状算子
        orient_outward: 若有符号体积为负则翻转全部面片
        name: 描述名称
    """

    vertices: np.ndarray
    faces: np.ndarray
    analytic: Optional[AnalyticSurface] = None
    orient_outward: bool = True
    name: str = "mesh"
    edges: np.ndarray = field(init=False, repr=False)
    face_edges: np.ndarray = field(init=False, repr=False)
    face_edge_signs: np.ndarray = field(init=False, repr=False)
    edge_faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        self._validate_and_build()
        if self.orient_outward and self.signed_volume < 0:
            logger.info("面片定向为内法向，整体翻转")
            self.faces = np.ascontiguousarray(self.faces[:, ::-1])
            self._validate_and_build()
        self._build_metric()

    # ------------------------------------------------------------------
    # 校验与拓扑
    # ------------------------------------------------------------------
    def _validate_and_build(self):
        v = self.vertices
        f = self.faces
        if v.ndim != 2 or v.shape[1] != 3 or f.ndim != 2 or f.shape[1] != 3:
            raise GeometryError("顶点/面片数组形状无效", diagnostic={'vertices': v.shape, 'faces': f.shape})
        if f.size == 0:
            raise GeometryError("网格没有面片")
        if f.min() < 0 or f.max() >= v.shape[0]:
            raise GeometryError("面片引用了不存在的顶点", diagnostic={'min': int(f.min()), 'max': int(f.max())})
        if not np.all(np.isfinite(v)):
            raise GeometryError("顶点坐标含非有限值")

        repeated = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if repeated.any():
            bad = int(np.nonzero(repeated)[0][0])
            raise GeometryError("退化面片：三个顶点不互异",
                                diagnostic={'face': bad, 'vertices': f[bad]})
        areas = MeshUtils.face_areas(v, f)
        if np.any(areas <= 0):
            bad = int(np.nonzero(areas <= 0)[0][0])
            raise GeometryError("退化面片：面积为零", diagnostic={'face': bad, 'vertices': f[bad]})

        used = np.zeros(v.shape[0], dtype=bool)
        used[f.ravel()] = True
        if not used.all():
            raise GeometryError("存在孤立顶点", diagnostic={'vertex': int(np.nonzero(~used)[0][0])})

        # 有向半边：第 k 条半边从 f[:, k] 指向 f[:, k+1]
        heads = f
        tails = np.roll(f, -1, axis=1)
        directed = np.stack([heads.ravel(), tails.ravel()], axis=1)
        undirected = np.sort(directed, axis=1)
        edges, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()

        if np.any(counts == 1):
            bad = edges[np.nonzero(counts == 1)[0][0]]
            raise GeometryError("open boundary：存在只属于一个面片的边", diagnostic={'edge': bad})
        if np.any(counts > 2):
            bad = edges[np.nonzero(counts > 2)[0][0]]
            raise GeometryError("non-manifold：存在被两个以上面片共享的边", diagnostic={'edge': bad})

        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        if np.any(dcounts > 1):
            dup = np.unique(directed, axis=0)[np.nonzero(dcounts > 1)[0][0]]
            raise GeometryError("inconsistent orientation：相邻面片定向不一致", diagnostic={'halfedge': dup})

        n_vertices = v.shape[0]
        adjacency = sp.coo_matrix((np.ones(edges.shape[0]), (edges[:, 0], edges[:, 1])),
                                  shape=(n_vertices, n_vertices))
        n_components, _ = connected_components(adjacency, directed=False)
        if n_components != 1:
            raise GeometryError("网格不连通", diagnostic={'components': int(n_components)})

        self.edges = edges
        self.face_edges = inverse.reshape(-1, 3)
        self.face_edge_signs = np.where(heads < tails, 1, -1).astype(np.int8)
        # 左面片：半边与边同向 (i<j)；右面片：反向
        edge_faces = np.full((edges.shape[0], 2), -1, dtype=np.int64)
        face_ids = np.repeat(np.arange(f.shape[0]), 3)
        signs = self.face_edge_signs.ravel()
        edge_faces[inverse[signs > 0], 0] = face_ids[signs > 0]
        edge_faces[inverse[signs < 0], 1] = face_ids[signs < 0]
        self.edge_faces = edge_faces

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def euler_characteristic(self) -> int:
        """χ = V − E + F"""
        return int(self.n_vertices - self.n_edges + self.n_faces)

    def genus(self) -> int:
        """𝔤 = (2 − χ) / 2"""
        return (2 - self.euler_characteristic()) // 2

    @property
    def signed_volume(self) -> float:
        """散度定理给出的有符号体积"""
        p0, p1, p2 = MeshUtils.face_vectors(self.vertices, self.faces)
        return float(np.einsum('ij,ij->i', p0, np.cross(p1, p2)).sum() / 6.0)

    # ------------------------------------------------------------------
    # 度量
    # ------------------------------------------------------------------
    def _build_metric(self):
        v, f = self.vertices, self.faces
        self.inward = self.signed_volume < 0
        self.face_areas = MeshUtils.face_areas(v, f)
        self.face_normals = MeshUtils.face_normals(v, f)
        self.face_centers = v[f].mean(axis=1)
        self.corner_angles = MeshUtils.corner_angles(v, f)

        # 余切权重 w_e = ½(cot α + cot β)
        cot = MeshUtils.corner_cotangents(v, f)
        weights = np.zeros(self.n_edges)
        for k in range(3):
            # 顶点 k 处的角对着半边 k+1
            np.add.at(weights, self.face_edges[:, (k + 1) % 3], 0.5 * cot[:, k])
        self.edge_weights = weights
        if np.any(weights <= 0):
            logger.debug(f"{int(np.sum(weights <= 0))} 条边的余切权重非正")

        self.vertex_areas = np.bincount(f.ravel(), weights=np.repeat(self.face_areas / 3.0, 3),
                                        minlength=self.n_vertices)
        self.angle_defects = 2.0 * np.pi - np.bincount(f.ravel(), weights=self.corner_angles.ravel(),
                                                       minlength=self.n_vertices)
        self.edge_lengths = np.linalg.norm(v[self.edges[:, 1]] - v[self.edges[:, 0]], axis=1)
        self.mean_edge_length = float(self.edge_lengths.mean())

        if self.analytic is not None:
            self.vertex_normals = self.analytic.normal(v)
            # 与面片定向保持一致（解析法向总是外法向）
            if self.inward:
                self.vertex_normals = -self.vertex_normals
        else:
            self.vertex_normals = self._angle_weighted_normals()
        self.frame_e1, self.frame_e2 = MeshUtils.frames_from_normals(self.vertex_normals)
        self.shape_ops = self._shape_operators()

    def _angle_weighted_normals(self) -> np.ndarray:
        normals = np.zeros_like(self.vertices)
        for k in range(3):
            np.add.at(normals, self.faces[:, k], self.corner_angles[:, k, None] * self.face_normals)
        return normals / np.linalg.norm(normals, axis=1, keepdims=True)

    def _shape_operators(self) -> np.ndarray:
        """顶点标架下的 2×2 形状算子"""
        if self.analytic is not None:
            s3 = self.analytic.shape_operator3(self.vertices)
            if self.inward:
                s3 = -s3
        else:
            s3 = self.estimate_shape_operator3()
        self.shape_ops3 = s3
        frames = np.stack([self.frame_e1, self.frame_e2], axis=2)  # (V, 3, 2)
        s2 = np.einsum('kia,kij,kjb->kab', frames, s3, frames)
        return 0.5 * (s2 + np.transpose(s2, (0, 2, 1)))

    def estimate_shape_operator3(self) -> np.ndarray:
        """
        由顶点法向的线性插值估计每个面的 -∇N，对称化后按面积平均到顶点
        Returns:
            (V, 3, 3) 环境坐标下的形状算子
        """
        v, f, n = self.vertices, self.faces, self.vertex_normals
        dx = np.stack([v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]]], axis=2)   # (F, 3, 2)
        dn = np.stack([n[f[:, 1]] - n[f[:, 0]], n[f[:, 2]] - n[f[:, 0]]], axis=2)
        gram = np.einsum('kia,kib->kab', dx, dx)
        grad = np.einsum('kia,kab,kjb->kij', dn, np.linalg.inv(gram), dx)           # dN = G dx
        nf = self.face_normals
        proj = np.eye(3)[None] - nf[:, :, None] * nf[:, None, :]
        g = np.einsum('kij,kjl,klm->kim', proj, grad, proj)
        s_face = -0.5 * (g + np.transpose(g, (0, 2, 1)))
        s_vertex = np.zeros((self.n_vertices, 3, 3))
        for k in range(3):
            np.add.at(s_vertex, f[:, k], self.face_areas[:, None, None] * s_face)
        return s_vertex / (3.0 * self.vertex_areas[:, None, None])

    # ------------------------------------------------------------------
    # 曲率
    # ------------------------------------------------------------------
    @property
    def total_area(self) -> float:
        return float(self.vertex_areas.sum())

    def gauss_curvature(self) -> np.ndarray:
        """0-形式 κ：角亏除以对偶面积"""
        return self.angle_defects / self.vertex_areas

    def total_curvature(self) -> float:
        """∫κ vol_g = Σ 角亏 = 2πχ"""
        return float(self.angle_defects.sum())

    def shape_operator_at(self, point: SurfacePoint) -> np.ndarray:
        """
        点处的形状算子（该点标架下的对称 2×2 矩阵）
        解析曲面用闭式；网格在顶点处取顶点估计，面内取重心插值
        """
        if point.vertex is not None:
            return self.shape_ops[point.vertex].copy()
        normal, e1, e2 = self.point_frame(point)
        if self.analytic is not None:
            s3 = self.analytic.shape_operator3(point.position[None])[0]
            if self.inward:
                s3 = -s3
        else:
            s_v = self.shape_ops3[self.faces[point.face]]
            s3 = np.einsum('k,kij->ij', point.bary, s_v)
        frame = np.stack([e1, e2], axis=1)
        s2 = frame.T @ s3 @ frame
        return 0.5 * (s2 + s2.T)

    # ------------------------------------------------------------------
    # 点与标架
    # ------------------------------------------------------------------
    def normal_at(self, positions: np.ndarray, faces: np.ndarray, bary: np.ndarray) -> np.ndarray:
        """点处法向：解析曲面取闭式，网格取顶点法向重心插值"""
        if self.analytic is not None:
            n = self.analytic.normal(positions)
            return -n if self.inward else n
        n = np.einsum('kj,kjd->kd', bary, self.vertex_normals[self.faces[faces]])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def point_frame(self, point: SurfacePoint) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """点处的 (N, e1, e2)"""
        if point.vertex is not None:
            v = point.vertex
            return self.vertex_normals[v], self.frame_e1[v], self.frame_e2[v]
        n = self.normal_at(point.position[None], np.array([point.face]), point.bary[None])
        e1, e2 = MeshUtils.frames_from_normals(n)
        return n[0], e1[0], e2[0]

    def vertex_point(self, vertex: int) -> SurfacePoint:
        """顶点对应的 SurfacePoint"""
        vertex = int(vertex)
        face = int(self.vertex_faces[vertex, 0])
        bary = (self.faces[face] == vertex).astype(float)
        return SurfacePoint(face=face, bary=bary, position=self.vertices[vertex].copy(), vertex=vertex)

    @cached_property
    def vertex_faces(self) -> np.ndarray:
        """(V, max_valence) 顶点相邻面片，用 -1 填充"""
        order = np.argsort(self.faces.ravel(), kind='stable')
        vertex_of = self.faces.ravel()[order]
        face_of = order // 3
        counts = np.bincount(vertex_of, minlength=self.n_vertices)
        width = int(counts.max())
        table = np.full((self.n_vertices, width), -1, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        slot = np.arange(vertex_of.size) - starts[vertex_of]
        table[vertex_of, slot] = face_of
        return table

    @cached_property
    def kdtree(self) -> cKDTree:
        return cKDTree(self.vertices)

    @cached_property
    def face_adjacency(self) -> sp.csr_matrix:
        """通过共享边相邻的面片图"""
        left, right = self.edge_faces[:, 0], self.edge_faces[:, 1]
        data = np.ones(2 * left.size)
        return sp.csr_matrix((data, (np.concatenate([left, right]), np.concatenate([right, left]))),
                             shape=(self.n_faces, self.n_faces))

    @cached_property
    def vertex_adjacency(self) -> sp.csr_matrix:
        """带边长权重的顶点图"""
        i, j = self.edges[:, 0], self.edges[:, 1]
        w = self.edge_lengths
        return sp.csr_matrix((np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                             shape=(self.n_vertices, self.n_vertices))

    def locate(self, positions: np.ndarray,
               candidates: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        批量点定位：最近若干顶点的相邻面中找最近点
        Args:
            positions: (k, 3) 曲面附近的点
            candidates: 检查的最近顶点数
        Returns:
            (faces (k,), bary (k, 3), projected (k, 3))
        """
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        k_nn = min(candidates or config.SURFACE_CONFIG.get('locate_candidates', 8), self.n_vertices)
        _, nn = self.kdtree.query(positions, k=k_nn)
        nn = np.asarray(nn).reshape(positions.shape[0], -1)
        cand = self.vertex_faces[nn].reshape(positions.shape[0], -1)            # (k, C)
        valid = cand >= 0
        safe = np.where(valid, cand, 0)
        tri = self.faces[safe]                                                   # (k, C, 3)
        n_q, n_c = safe.shape
        rep = np.repeat(positions, n_c, axis=0)
        a = self.vertices[tri[:, :, 0]].reshape(-1, 3)
        b = self.vertices[tri[:, :, 1]].reshape(-1, 3)
        c = self.vertices[tri[:, :, 2]].reshape(-1, 3)
        closest, bary, dist2 = MeshUtils.closest_point_on_triangles(rep, a, b, c)
        dist2 = np.where(valid.ravel(), dist2, np.inf).reshape(n_q, n_c)
        best = np.argmin(dist2, axis=1)
        flat = np.arange(n_q) * n_c + best
        return safe[np.arange(n_q), best], bary[flat], closest[flat]

    def make_point(self, position: np.ndarray) -> SurfacePoint:
        """把空间点落到曲面上并构造 SurfacePoint"""
        position = np.asarray(position, dtype=float)
        if self.analytic is not None:
            position = self.analytic.project(position[None])[0]
        faces, bary, projected = self.locate(position[None])
        bary = np.clip(bary[0], 0.0, None)
        bary /= bary.sum()
        world = position if self.analytic is not None else projected[0]
        return SurfacePoint(face=int(faces[0]), bary=bary, position=world)

    def summary(self) -> dict:
        """几何报告"""
        chi = self.euler_characteristic()
        report = {
            'name': self.name,
            'vertices': self.n_vertices,
            'edges': self.n_edges,
            'faces': self.n_faces,
            'euler_characteristic': chi,
            'genus': self.genus(),
            'area': self.total_area,
            'total_curvature': self.total_curvature(),
            'total_curvature_over_2pi': self.total_curvature() / (2.0 * np.pi),
            'mean_edge_length': self.mean_edge_length,
        }
        if self.analytic is not None:
            report['analytic'] = self.analytic.descriptor()
        return report
