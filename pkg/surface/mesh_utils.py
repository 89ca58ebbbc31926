"""
网格工具类 - 提供三角形几何量、切平面投影与最小旋转等向量化计算
"""

from typing import Tuple

import numpy as np


class MeshUtils:
    """网格工具类"""

    # 数值下限常量
    AREA_FLOOR = 1e-300      # 面积下限，避免除零
    ROTATION_FLOOR = 1e-15   # 反平行法向判定阈值

    @staticmethod
    def face_vectors(vertices: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        取出每个面的三个顶点坐标
        Args:
            vertices: (V, 3) 顶点坐标
            faces: (F, 3) 顶点索引
        Returns:
            三个 (F, 3) 数组 (p0, p1, p2)
        """
        return vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]

    @staticmethod
    def face_cross(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        """面的未归一化法向 (p1 - p0) × (p2 - p0)"""
        p0, p1, p2 = MeshUtils.face_vectors(vertices, faces)
        return np.cross(p1 - p0, p2 - p0)

    @staticmethod
    def face_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        """三角形面积"""
        return 0.5 * np.linalg.norm(MeshUtils.face_cross(vertices, faces), axis=1)

    @staticmethod
    def face_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        """单位面法向（按面片定向）"""
        n = MeshUtils.face_cross(vertices, faces)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.maximum(norm, MeshUtils.AREA_FLOOR)

    @staticmethod
    def corner_angles(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        """
        每个面三个角的内角
        Returns:
            (F, 3)，第 k 列是顶点 faces[:, k] 处的角
        """
        angles = np.empty(faces.shape, dtype=float)
        for k in range(3):
            p = vertices[faces[:, k]]
            a = vertices[faces[:, (k + 1) % 3]] - p
            b = vertices[faces[:, (k + 2) % 3]] - p
            cross = np.linalg.norm(np.cross(a, b), axis=1)
            angles[:, k] = np.arctan2(cross, np.einsum('ij,ij->i', a, b))
        return angles

    @staticmethod
    def corner_cotangents(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
        """
        每个面三个角的余切
        Returns:
            (F, 3)，第 k 列是顶点 faces[:, k] 处角的余切（对边为 k+1 → k+2）
        """
        cot = np.empty(faces.shape, dtype=float)
        for k in range(3):
            p = vertices[faces[:, k]]
            a = vertices[faces[:, (k + 1) % 3]] - p
            b = vertices[faces[:, (k + 2) % 3]] - p
            cross = np.linalg.norm(np.cross(a, b), axis=1)
            cot[:, k] = np.einsum('ij,ij->i', a, b) / np.maximum(cross, MeshUtils.AREA_FLOOR)
        return cot

    @staticmethod
    def project_tangent(vectors: np.ndarray, normals: np.ndarray) -> np.ndarray:
        """把向量投影到法向为 normals 的切平面"""
        return vectors - np.einsum('ij,ij->i', vectors, normals)[:, None] * normals

    @staticmethod
    def rotate_between(vectors: np.ndarray, n_from: np.ndarray, n_to: np.ndarray) -> np.ndarray:
        """
        用把 n_from 转到 n_to 的最小旋转作用于 vectors（逐行）
        Rv = v + k×v + k×(k×v)/(1+c)，k = n_from × n_to，c = n_from·n_to
        Args:
            vectors: (k, 3)
            n_from, n_to: (k, 3) 单位向量
        Returns:
            (k, 3) 旋转后的向量
        """
        k = np.cross(n_from, n_to)
        c = np.einsum('ij,ij->i', n_from, n_to)
        kv = np.cross(k, vectors)
        kkv = np.cross(k, kv)
        denom = np.maximum(1.0 + c, MeshUtils.ROTATION_FLOOR)
        return vectors + kv + kkv / denom[:, None]

    @staticmethod
    def frames_from_normals(normals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        由单位法向构造右手正交标架 (e1, e2)，e2 = N × e1
        e1 取与 N 最不平行的坐标轴在切平面上的投影
        """
        axes = np.eye(3)[np.argmin(np.abs(normals), axis=1)]
        e1 = MeshUtils.project_tangent(axes, normals)
        e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
        e2 = np.cross(normals, e1)
        return e1, e2

    @staticmethod
    def closest_point_on_triangles(points: np.ndarray, a: np.ndarray, b: np.ndarray,
                                   c: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        点到三角形的最近点（全部按行向量化）
        Args:
            points, a, b, c: (k, 3)
        Returns:
            (closest (k, 3), bary (k, 3), dist2 (k,))
        """
        ab = b - a
        ac = c - a
        n = np.cross(ab, ac)
        nn = np.maximum(np.einsum('ij,ij->i', n, n), MeshUtils.AREA_FLOOR)
        ap = points - a
        # 平面内投影的重心坐标
        v = np.einsum('ij,ij->i', np.cross(ap, ac), n) / nn
        w = np.einsum('ij,ij->i', np.cross(ab, ap), n) / nn
        u = 1.0 - v - w
        bary = np.stack([u, v, w], axis=1)
        inside = (bary >= 0.0).all(axis=1)
        closest = a + v[:, None] * ab + w[:, None] * ac
        dist2 = np.einsum('ij,ij->i', points - closest, points - closest)

        if not inside.all():
            idx = np.nonzero(~inside)[0]
            best_d = np.full(idx.size, np.inf)
            best_p = np.zeros((idx.size, 3))
            best_b = np.zeros((idx.size, 3))
            corners = (a[idx], b[idx], c[idx])
            p = points[idx]
            for k in range(3):
                s0 = corners[k]
                s1 = corners[(k + 1) % 3]
                seg = s1 - s0
                length2 = np.maximum(np.einsum('ij,ij->i', seg, seg), MeshUtils.AREA_FLOOR)
                t = np.einsum('ij,ij->i', p - s0, seg) / length2
                t = np.clip(t, 0.0, 1.0)
                q = s0 + t[:, None] * seg
                d = np.einsum('ij,ij->i', p - q, p - q)
                better = d < best_d
                best_d[better] = d[better]
                best_p[better] = q[better]
                cand = np.zeros((idx.size, 3))
                cand[:, k] = 1.0 - t
                cand[:, (k + 1) % 3] = t
                best_b[better] = cand[better]
            closest[idx] = best_p
            bary[idx] = best_b
            dist2[idx] = best_d
        return closest, bary, dist2

    @staticmethod
    def wrap_angle(angles: np.ndarray) -> np.ndarray:
        """把角度折叠到 (-π, π]"""
        wrapped = np.mod(angles + np.pi, 2.0 * np.pi) - np.pi
        return np.where(wrapped == -np.pi, np.pi, wrapped)
