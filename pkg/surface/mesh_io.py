"""
网格文件读写 - ASCII OFF 与 OBJ（仅三角形）
"""

from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from errors import GeometryError

PathLike = Union[str, Path]


def _tokens(path: Path):
    with open(path, 'r', encoding='utf-8') as handle:
        for line in handle:
            line = line.split('#', 1)[0].strip()
            if line:
                yield line


def read_off(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """读取 ASCII OFF 三角网格"""
    path = Path(path)
    lines = _tokens(path)
    try:
        header = next(lines)
        if header.startswith('OFF'):
            rest = header[3:].split()
            counts = rest if rest else next(lines).split()
        else:
            raise GeometryError("OFF 文件缺少文件头", diagnostic={'path': str(path)})
        n_v, n_f = int(counts[0]), int(counts[1])
        vertices = np.array([[float(x) for x in next(lines).split()[:3]] for _ in range(n_v)])
        faces = []
        for k in range(n_f):
            items = next(lines).split()
            if int(items[0]) != 3:
                raise GeometryError("只支持三角形面片", diagnostic={'path': str(path), 'face': k})
            faces.append([int(x) for x in items[1:4]])
    except StopIteration:
        raise GeometryError("OFF 文件提前结束", diagnostic={'path': str(path)})
    except (ValueError, IndexError) as e:
        raise GeometryError(f"OFF 文件格式错误: {e}", diagnostic={'path': str(path)})
    return vertices.reshape(-1, 3), np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def read_obj(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """读取 OBJ 三角网格（忽略纹理与法向索引）"""
    path = Path(path)
    vertices, faces = [], []
    try:
        for line in _tokens(path):
            items = line.split()
            if items[0] == 'v':
                vertices.append([float(x) for x in items[1:4]])
            elif items[0] == 'f':
                if len(items) != 4:
                    raise GeometryError("只支持三角形面片", diagnostic={'path': str(path), 'face': len(faces)})
                ids = [int(tok.split('/')[0]) for tok in items[1:]]
                faces.append([i - 1 if i > 0 else len(vertices) + i for i in ids])
    except (ValueError, IndexError) as e:
        raise GeometryError(f"OBJ 文件格式错误: {e}", diagnostic={'path': str(path)})
    return np.asarray(vertices, dtype=float).reshape(-1, 3), np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def read_mesh(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """按扩展名读取网格"""
    path = Path(path)
    if not path.exists():
        raise GeometryError("网格文件不存在", diagnostic={'path': str(path)})
    suffix = path.suffix.lower()
    if suffix == '.off':
        return read_off(path)
    if suffix == '.obj':
        return read_obj(path)
    raise GeometryError(f"不支持的网格格式: {suffix}", diagnostic={'path': str(path)})


def write_off(path: PathLike, vertices: np.ndarray, faces: np.ndarray, comment: Optional[str] = None):
    """写出 ASCII OFF（comment 写在文件头之后的注释行）"""
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write("OFF\n")
        if comment:
            handle.write(f"# {comment}\n")
        handle.write(f"{vertices.shape[0]} {faces.shape[0]} 0\n")
        for p in vertices:
            handle.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for f in faces:
            handle.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def write_obj(path: PathLike, vertices: np.ndarray, faces: np.ndarray, comment: Optional[str] = None):
    """写出 OBJ（索引从 1 开始）"""
    with open(path, 'w', encoding='utf-8') as handle:
        if comment:
            handle.write(f"# {comment}\n")
        for p in vertices:
            handle.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for f in faces:
            handle.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
