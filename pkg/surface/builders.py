"""
曲面构造 - 由解析描述或网格文件构造 SurfaceGeometry
"""

from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np

import config
from errors import GeometryError
from logger_config import setup_logger
from surface.analytic import Ellipsoid, Sphere, Torus
from surface.base import SurfaceGeometry
from surface.mesh_io import read_mesh

logger = setup_logger(__name__)


def _icosahedron() -> Tuple[np.ndarray, np.ndarray]:
    t = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return vertices / np.linalg.norm(vertices, axis=1, keepdims=True), faces


def _subdivide(vertices: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """中点细分并投影回单位球"""
    edges = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
    unique, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    mids = 0.5 * (vertices[unique[:, 0]] + vertices[unique[:, 1]])
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    n_f = faces.shape[0]
    m01 = vertices.shape[0] + inverse[:n_f]
    m12 = vertices.shape[0] + inverse[n_f:2 * n_f]
    m20 = vertices.shape[0] + inverse[2 * n_f:]
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new_faces = np.concatenate([
        np.stack([a, m01, m20], axis=1),
        np.stack([b, m12, m01], axis=1),
        np.stack([c, m20, m12], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    return np.vstack([vertices, mids]), new_faces


def icosphere(refine: int = 3, radius: float = 1.0, **kwargs) -> SurfaceGeometry:
    """
    细分二十面体球面
    Args:
        refine: 细分次数（refine=3 时 642 个顶点）
        radius: 球半径
    """
    if refine < 0:
        raise GeometryError("细分次数必须非负", diagnostic={'refine': refine})
    sphere = Sphere(radius)
    vertices, faces = _icosahedron()
    for _ in range(int(refine)):
        vertices, faces = _subdivide(vertices, faces)
    return SurfaceGeometry(radius * vertices, faces, analytic=sphere,
                           name=f"icosphere(refine={refine}, R={radius:g})", **kwargs)


def ellipsoid(axes=(1.0, 1.0, 1.5), refine: int = 3, **kwargs) -> SurfaceGeometry:
    """由单位二十面体球面缩放得到的椭球网格"""
    surface = Ellipsoid(axes)
    vertices, faces = _icosahedron()
    for _ in range(int(refine)):
        vertices, faces = _subdivide(vertices, faces)
    return SurfaceGeometry(vertices * surface.axes[None, :], faces, analytic=surface,
                           name=f"ellipsoid(axes={surface.axes.tolist()}, refine={refine})", **kwargs)


def torus(major_radius: float = 2.0, minor_radius: float = 0.5, nu: int = 64, nv: int = 32,
          **kwargs) -> SurfaceGeometry:
    """
    参数网格环面 X(u,v) = ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)
    每个参数格剖成两个三角形，(u,v) 平面内逆时针即外法向
    """
    if nu < 3 or nv < 3:
        raise GeometryError("环面网格分辨率至少为 3×3", diagnostic={'nu': nu, 'nv': nv})
    surface = Torus(major_radius, minor_radius)
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing='ij')
    ring = major_radius + minor_radius * np.cos(vv)
    vertices = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor_radius * np.sin(vv)], axis=-1).reshape(-1, 3)

    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing='ij')
    i, j = i.ravel(), j.ravel()
    ip, jp = (i + 1) % nu, (j + 1) % nv
    v00, v10, v11, v01 = i * nv + j, ip * nv + j, ip * nv + jp, i * nv + jp
    faces = np.concatenate([np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)])
    return SurfaceGeometry(vertices, faces, analytic=surface,
                           name=f"torus(R={major_radius:g}, r={minor_radius:g}, {nu}x{nv})", **kwargs)


def double_torus(cells: int = 2, **kwargs) -> SurfaceGeometry:
    """
    亏格 2 曲面：5×3×1 体素板挖去两个孔后的表面
    Args:
        cells: 每个体素面沿每个方向的剖分数
    """
    if cells < 1:
        raise GeometryError("cells 必须至少为 1", diagnostic={'cells': cells})
    occupied = np.ones((5, 3, 1), dtype=bool)
    occupied[1, 1, 0] = False
    occupied[3, 1, 0] = False

    index: Dict[Tuple[int, int, int], int] = {}
    vertices = []
    faces = []

    def vertex(p):
        key = tuple(int(x) for x in p)
        if key not in index:
            index[key] = len(vertices)
            vertices.append(key)
        return index[key]

    eye = np.eye(3, dtype=int)
    for cell in zip(*np.nonzero(occupied)):
        cell = np.array(cell)
        for axis in range(3):
            for side in (1, -1):
                neighbor = cell + side * eye[axis]
                inside = np.all(neighbor >= 0) and np.all(neighbor < occupied.shape)
                if inside and occupied[tuple(neighbor)]:
                    continue
                b, c = (axis + 1) % 3, (axis + 2) % 3
                base = cell * cells + (cells if side > 0 else 0) * eye[axis]
                for s in range(cells):
                    for t in range(cells):
                        p0 = base + s * eye[b] + t * eye[c]
                        quad = [p0, p0 + eye[b], p0 + eye[b] + eye[c], p0 + eye[c]]
                        if side < 0:
                            quad = quad[::-1]
                        ids = [vertex(q) for q in quad]
                        faces.append([ids[0], ids[1], ids[2]])
                        faces.append([ids[0], ids[2], ids[3]])
    vertices = np.asarray(vertices, dtype=float) / cells
    return SurfaceGeometry(vertices, np.asarray(faces, dtype=np.int64),
                           name=f"double_torus(cells={cells})", **kwargs)


def build_from_descriptor(descriptor: Dict[str, Any]) -> SurfaceGeometry:
    """
    由描述字典构造曲面
    Args:
        descriptor: {'kind': 'sphere'|'ellipsoid'|'torus'|'double_torus'|'mesh', ...}
    """
    kind = descriptor.get('kind')
    orient = descriptor.get('orient_outward', config.SURFACE_CONFIG.get('orient_outward', True))
    if kind == 'sphere':
        return icosphere(int(descriptor.get('refine', 3)), float(descriptor.get('radius', 1.0)),
                         orient_outward=orient)
    if kind == 'ellipsoid':
        return ellipsoid(tuple(descriptor.get('axes', (1.0, 1.0, 1.5))), int(descriptor.get('refine', 3)),
                         orient_outward=orient)
    if kind == 'torus':
        return torus(float(descriptor.get('major_radius', 2.0)), float(descriptor.get('minor_radius', 0.5)),
                     int(descriptor.get('nu', 64)), int(descriptor.get('nv', 32)), orient_outward=orient)
    if kind == 'double_torus':
        return double_torus(int(descriptor.get('cells', 2)), orient_outward=orient)
    if kind == 'mesh':
        if 'path' not in descriptor:
            raise GeometryError("网格描述缺少 path 字段")
        return load_or_build(descriptor['path'])
    raise GeometryError(f"未知的曲面类型: {kind}", diagnostic={'descriptor': descriptor})


def load_or_build(source: Union[str, Path, Dict[str, Any]]) -> SurfaceGeometry:
    """
    读取网格文件或按解析描述构造曲面
    Args:
        source: OFF/OBJ 路径，或描述字典
    Returns:
        满足全部不变量的 SurfaceGeometry
    """
    if isinstance(source, dict):
        geom = build_from_descriptor(source)
    else:
        vertices, faces = read_mesh(source)
        geom = SurfaceGeometry(vertices, faces, orient_outward=config.SURFACE_CONFIG.get('orient_outward', True),
                               name=Path(source).name)
    logger.info(f"曲面 {geom.name}: V={geom.n_vertices}, F={geom.n_faces}, χ={geom.euler_characteristic()}")
    return geom
