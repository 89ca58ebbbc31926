"""
测地工具 - 指数映射、对数映射与测地距离
"""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

import config
from errors import StepTooLargeError
from logger_config import setup_logger
from surface.base import SurfaceGeometry, SurfacePoint
from surface.mesh_utils import MeshUtils

logger = setup_logger(__name__)


def _surface_config() -> dict:
    return config.SURFACE_CONFIG


def _point_normal(geom: SurfaceGeometry, point: SurfacePoint) -> np.ndarray:
    return geom.normal_at(point.position[None], np.array([point.face]), point.bary[None])[0]


def _finish(geom: SurfaceGeometry, position: np.ndarray, face: int, bary: np.ndarray) -> SurfacePoint:
    bary = np.clip(bary, 0.0, None)
    bary = bary / bary.sum()
    return SurfacePoint(face=int(face), bary=bary, position=position)


def exp_map(geom: SurfaceGeometry, point: SurfacePoint, displacement: np.ndarray,
            trust: Optional[float] = None) -> SurfacePoint:
    """
    指数映射 Exp_p(v)
    Args:
        geom: 曲面
        point: 起点
        displacement: 起点切平面内的 R³ 向量
        trust: 单步上限（平均边长倍数），None 取配置值，<= 0 关闭检查
    Returns:
        终点 SurfacePoint
    Raises:
        StepTooLargeError: 步长超出信赖域
    """
    surface_config = _surface_config()
    v = np.asarray(displacement, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed == 0.0:
        return point
    trust = surface_config.get('trust_region', 2.0) if trust is None else trust
    h = geom.mean_edge_length
    if trust > 0 and speed > trust * h:
        raise StepTooLargeError("指数映射步长超出信赖域",
                                diagnostic={'step': speed, 'limit': trust * h})

    analytic = geom.analytic
    closed = analytic.exp(point.position[None], v[None]) if analytic is not None else None
    if closed is not None:
        target = closed[0]
        faces, bary, _ = geom.locate(target[None])
        return _finish(geom, target, faces[0], bary[0])

    n_sub = max(1, int(np.ceil(speed / h * surface_config.get('substeps_per_edge', 2))))
    position = point.position.copy()
    normal = _point_normal(geom, point)
    step = MeshUtils.project_tangent(v[None], normal[None])[0]
    step *= speed / max(np.linalg.norm(step), 1e-300)
    face, bary = point.face, point.bary
    for _ in range(n_sub):
        trial = position + step / n_sub
        if analytic is not None:
            trial = analytic.project(trial[None])[0]
        faces, barys, projected = geom.locate(trial[None])
        face, bary = int(faces[0]), barys[0]
        position = trial if analytic is not None else projected[0]
        new_normal = geom.normal_at(position[None], np.array([face]), bary[None])[0]
        # 把行进方向沿法向最小旋转平移到新切平面
        step = MeshUtils.rotate_between(step[None], normal[None], new_normal[None])[0]
        step = MeshUtils.project_tangent(step[None], new_normal[None])[0]
        norm = np.linalg.norm(step)
        if norm > 0:
            step *= speed / norm
        normal = new_normal
    return _finish(geom, position, face, bary)


def log_map(geom: SurfaceGeometry, p: SurfacePoint, q: SurfacePoint) -> np.ndarray:
    """
    对数映射 Log_p(q)：不动点迭代 v ← v + P_p(q − Exp_p(v))
    Returns:
        p 切平面内的 R³ 向量
    """
    analytic = geom.analytic
    closed = analytic.log(p.position[None], q.position[None]) if analytic is not None else None
    if closed is not None:
        return closed[0]
    surface_config = _surface_config()
    normal = _point_normal(geom, p)
    v = MeshUtils.project_tangent((q.position - p.position)[None], normal[None])[0]
    tol = surface_config.get('log_map_tol', 1e-12)
    for _ in range(surface_config.get('log_map_iterations', 20)):
        reached = exp_map(geom, p, v, trust=0)
        correction = MeshUtils.project_tangent((q.position - reached.position)[None], normal[None])[0]
        v = v + correction
        if np.linalg.norm(correction) <= tol * max(np.linalg.norm(v), geom.mean_edge_length):
            break
    return v


def _unfold_passes(geom: SurfaceGeometry, dist: np.ndarray, passes: int) -> np.ndarray:
    """
    三角形展开修正：在每个三角形平面内由两个顶点的距离放置虚拟源点，更新第三个顶点
    """
    v, f = geom.vertices, geom.faces
    for _ in range(passes):
        for k in range(3):
            ia, ib, ic = f[:, k], f[:, (k + 1) % 3], f[:, (k + 2) % 3]
            da, db = dist[ia], dist[ib]
            ok = np.isfinite(da) & np.isfinite(db)
            ab = v[ib] - v[ia]
            ac = v[ic] - v[ia]
            c = np.linalg.norm(ab, axis=1)
            cx = np.einsum('ij,ij->i', ac, ab) / c
            cy = np.linalg.norm(np.cross(ab, ac), axis=1) / c
            sx = (da ** 2 - db ** 2 + c ** 2) / (2.0 * c)
            sy2 = da ** 2 - sx ** 2
            ok &= sy2 >= 0.0
            sy = -np.sqrt(np.where(ok, sy2, 0.0))
            # 源点到 C 的直线须穿过 AB 边
            t = np.where(cy - sy > 0, -sy / np.maximum(cy - sy, 1e-300), -1.0)
            cross_x = sx + t * (cx - sx)
            ok &= (cross_x >= 0.0) & (cross_x <= c)
            candidate = np.where(ok, np.hypot(cx - sx, cy - sy), np.inf)
            np.minimum.at(dist, ic, candidate)
    return dist


def distance_field(geom: SurfaceGeometry, point: SurfacePoint) -> np.ndarray:
    """
    从 point 到所有顶点的测地距离
    球面用闭式；网格用虚拟源 Dijkstra 加展开修正
    """
    analytic = geom.analytic
    if analytic is not None:
        closed = analytic.distance(np.broadcast_to(point.position, geom.vertices.shape), geom.vertices)
        if closed is not None:
            return closed
    n = geom.n_vertices
    i, j = geom.edges[:, 0], geom.edges[:, 1]
    w = geom.edge_lengths
    corner = geom.faces[point.face]
    src = np.linalg.norm(geom.vertices[corner] - point.position[None], axis=1)
    rows = np.concatenate([i, j, np.full(3, n)])
    cols = np.concatenate([j, i, corner])
    data = np.concatenate([w, w, np.maximum(src, 1e-300)])
    graph = sp.csr_matrix((data, (rows, cols)), shape=(n + 1, n + 1))
    dist = dijkstra(graph, directed=True, indices=n)[:n]
    dist[corner] = np.minimum(dist[corner], src)
    passes = int(_surface_config().get('geodesic_unfold_passes', 2))
    return _unfold_passes(geom, dist, passes)


def geodesic_distance(geom: SurfaceGeometry, p: SurfacePoint, q: SurfacePoint) -> float:
    """测地距离 dist_g(p, q)"""
    analytic = geom.analytic
    if analytic is not None:
        closed = analytic.distance(p.position[None], q.position[None])
        if closed is not None:
            return float(closed[0])
    chord = float(np.linalg.norm(q.position - p.position))
    if p.face == q.face or np.intersect1d(geom.faces[p.face], geom.faces[q.face]).size > 0:
        return chord
    # 两个方向取平均以保证对称
    return 0.5 * (_one_way(geom, p, q, chord) + _one_way(geom, q, p, chord))


def _one_way(geom: SurfaceGeometry, p: SurfacePoint, q: SurfacePoint, chord: float) -> float:
    field = distance_field(geom, p)
    corner = geom.faces[q.face]
    through = field[corner] + np.linalg.norm(geom.vertices[corner] - q.position[None], axis=1)
    return float(max(through.min(), chord))


def pairwise_distances(geom: SurfaceGeometry, points: List[SurfacePoint],
                       others: Optional[List[SurfacePoint]] = None) -> np.ndarray:
    """点集之间的测地距离矩阵"""
    symmetric = others is None
    others = points if others is None else others
    out = np.zeros((len(points), len(others)))
    for a, p in enumerate(points):
        for b, q in enumerate(others):
            if symmetric and b < a:
                out[a, b] = out[b, a]
            elif symmetric and a == b:
                out[a, b] = 0.0
            else:
                out[a, b] = geodesic_distance(geom, p, q)
    return out


def min_separation(geom: SurfaceGeometry, points: List[SurfacePoint]) -> float:
    """最小两两距离（单点时为无穷大）"""
    if len(points) < 2:
        return float('inf')
    d = pairwise_distances(geom, points)
    return float(d[np.triu_indices(len(points), 1)].min())


def tangent_at(geom: SurfaceGeometry, point: SurfacePoint, vector: np.ndarray) -> np.ndarray:
    """把 R³ 向量投影到点处切平面"""
    normal = _point_normal(geom, point)
    return MeshUtils.project_tangent(np.asarray(vector, dtype=float)[None], normal[None])[0]

