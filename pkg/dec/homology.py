"""
同调生成元 - 树-余树构造、原始环路与对偶闭链
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra, minimum_spanning_tree

import config
from errors import HomologyError
from logger_config import setup_logger
from surface.base import SurfaceGeometry

logger = setup_logger(__name__)


@dataclass
class HomologyLoops:
    """
    2𝔤 条简单闭合边链 γ_h
    loops[h] 是顶点序列 (v0, v1, ..., v_{m-1})，隐含闭合边 v_{m-1} → v0
    """

    loops: List[np.ndarray] = field(default_factory=list)
    edge_ids: List[np.ndarray] = field(default_factory=list)
    edge_signs: List[np.ndarray] = field(default_factory=list)
    generators: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    dual_cycles: List[np.ndarray] = field(default_factory=list)   # 每个生成元对应的闭 1-形式

    def __len__(self) -> int:
        return len(self.loops)

    def integrate(self, cochain: np.ndarray) -> np.ndarray:
        """所有环路上的积分"""
        return np.array([np.dot(s, cochain[e]) for e, s in zip(self.edge_ids, self.edge_signs)])

    def vertices(self) -> np.ndarray:
        if not self.loops:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.loops))


def edge_lookup(geom: SurfaceGeometry) -> sp.csr_matrix:
    """(V, V) 稀疏表，值为边编号 + 1"""
    i, j = geom.edges[:, 0], geom.edges[:, 1]
    ids = np.arange(geom.n_edges) + 1
    return sp.csr_matrix((np.concatenate([ids, ids]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                         shape=(geom.n_vertices, geom.n_vertices))


def loop_edges(geom: SurfaceGeometry, loop: np.ndarray, lookup: Optional[sp.csr_matrix] = None):
    """顶点环路 → (边编号, 方向符号)"""
    lookup = edge_lookup(geom) if lookup is None else lookup
    a = np.asarray(loop)
    b = np.roll(a, -1)
    ids = np.asarray(lookup[a, b]).ravel().astype(np.int64) - 1
    if np.any(ids < 0):
        raise HomologyError("环路包含不存在的边", diagnostic={'loop': a})
    signs = np.where(a < b, 1.0, -1.0)
    return ids, signs


def loop_integral(cochain: np.ndarray, loop: np.ndarray, geom: SurfaceGeometry) -> float:
    """1-形式沿顶点环路的积分"""
    ids, signs = loop_edges(geom, loop)
    return float(np.dot(signs, np.asarray(cochain)[ids]))


def _tree_path(parent: np.ndarray, depth: np.ndarray, a: int, b: int):
    """树上 a → LCA → b 的顶点序列"""
    left, right = [a], [b]
    while depth[left[-1]] > depth[right[-1]]:
        left.append(parent[left[-1]])
    while depth[right[-1]] > depth[left[-1]]:
        right.append(parent[right[-1]])
    while left[-1] != right[-1]:
        left.append(parent[left[-1]])
        right.append(parent[right[-1]])
    return left + right[-2::-1]


def homology_generators(geom: SurfaceGeometry, excluded: Optional[Iterable[int]] = None,
                        params: Optional[Dict[str, Any]] = None) -> HomologyLoops:
    """
    树-余树同调生成元
    Args:
        geom: 曲面
        excluded: 环路需要避开的顶点集合
        params: 覆盖 config.DEC_CONFIG
    Returns:
        HomologyLoops（亏格 0 时为空）
    Raises:
        HomologyError: 无法得到 2𝔤 条避开排除集的独立环路
    """
    params = {**config.DEC_CONFIG, **(params or {})}
    genus = geom.genus()
    if genus == 0:
        return HomologyLoops()

    n_v, n_e, n_f = geom.n_vertices, geom.n_edges, geom.n_faces
    excluded_mask = np.zeros(n_v, dtype=bool)
    if excluded is not None:
        excluded_mask[np.asarray(list(excluded), dtype=np.int64)] = True
    i, j = geom.edges[:, 0], geom.edges[:, 1]
    touches = excluded_mask[i] | excluded_mask[j]
    penalty = params['excluded_penalty'] * geom.mean_edge_length
    weights = geom.edge_lengths + penalty * touches

    # 原始树：根取离排除集最远的顶点
    graph = sp.csr_matrix((np.concatenate([weights, weights]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                          shape=(n_v, n_v))
    if excluded_mask.any():
        away = dijkstra(geom.vertex_adjacency, indices=np.nonzero(excluded_mask)[0], min_only=True)
        root = int(np.argmax(away))
    else:
        root = 0
    dist, pred = dijkstra(graph, indices=root, return_predecessors=True)
    parent = pred.copy()
    parent[root] = root
    order = np.argsort(dist, kind='stable')
    depth = np.zeros(n_v, dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[parent[v]] + 1

    lookup = edge_lookup(geom)
    in_tree = np.zeros(n_e, dtype=bool)
    children = np.nonzero(np.arange(n_v) != root)[0]
    in_tree[np.asarray(lookup[children, parent[children]]).ravel().astype(np.int64) - 1] = True

    # 对偶树：保留环路较长或触及排除集的边，剩余边的环路最短
    candidates = np.nonzero(~in_tree)[0]
    score = dist[i[candidates]] + dist[j[candidates]] + geom.edge_lengths[candidates]
    score = score + 10.0 * (score.max() + 1.0) * touches[candidates]
    cost = score.max() + 1.0 - score
    left, right = geom.edge_faces[candidates, 0], geom.edge_faces[candidates, 1]
    face_graph = sp.csr_matrix((cost, (np.minimum(left, right), np.maximum(left, right))), shape=(n_f, n_f))
    mst = minimum_spanning_tree(face_graph).tocoo()
    pair_to_edge = {(int(min(a, b)), int(max(a, b))): int(e) for a, b, e in zip(left, right, candidates)}
    in_dual = np.zeros(n_e, dtype=bool)
    dual_adj: List[List[tuple]] = [[] for _ in range(n_f)]
    for a, b in zip(mst.row, mst.col):
        e = pair_to_edge[(int(min(a, b)), int(max(a, b)))]
        in_dual[e] = True
        dual_adj[a].append((int(b), e))
        dual_adj[b].append((int(a), e))

    generators = np.nonzero(~in_tree & ~in_dual)[0]
    if generators.size != 2 * genus:
        raise HomologyError("树-余树剩余边数不等于 2𝔤",
                            diagnostic={'leftover': int(generators.size), 'expected': 2 * genus})

    # 对偶树 BFS
    face_parent = np.full(n_f, -1, dtype=np.int64)
    face_parent_edge = np.full(n_f, -1, dtype=np.int64)
    face_depth = np.zeros(n_f, dtype=np.int64)
    seen = np.zeros(n_f, dtype=bool)
    seen[0] = True
    face_parent[0] = 0
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b, e in dual_adj[a]:
            if not seen[b]:
                seen[b] = True
                face_parent[b] = a
                face_parent_edge[b] = e
                face_depth[b] = face_depth[a] + 1
                queue.append(b)

    result = HomologyLoops(generators=generators)
    for g in generators:
        a, b = int(geom.edges[g, 0]), int(geom.edges[g, 1])
        path = _tree_path(parent, depth, b, a)          # b → ... → a，闭合边 a → b 即生成元
        loop = np.asarray(path, dtype=np.int64)
        if excluded_mask[loop].any():
            raise HomologyError("环路无法避开排除的顶点集合",
                                diagnostic={'generator': int(g), 'hits': np.nonzero(excluded_mask[loop])[0].size})
        ids, signs = loop_edges(geom, loop, lookup)
        result.loops.append(loop)
        result.edge_ids.append(ids)
        result.edge_signs.append(signs)
        result.dual_cycles.append(_dual_cycle_form(geom, g, face_parent, face_parent_edge, face_depth))
    logger.debug(f"同调生成元: {len(result)} 条环路，长度 {[len(l) for l in result.loops]}")
    return result


def _dual_cycle_form(geom: SurfaceGeometry, generator: int, face_parent: np.ndarray,
                     face_parent_edge: np.ndarray, face_depth: np.ndarray) -> np.ndarray:
    """
    对偶闭链对应的闭 1-形式：对偶路径从左面穿到右面记 +1，反向记 −1
    """
    omega = np.zeros(geom.n_edges)
    left_of = geom.edge_faces[:, 0]
    start, end = int(geom.edge_faces[generator, 0]), int(geom.edge_faces[generator, 1])
    omega[generator] += 1.0   # 生成元：左 → 右

    # 从 end 沿对偶树回到 start
    up_from_end, up_from_start = [], []
    a, b = end, start
    while face_depth[a] > face_depth[b]:
        up_from_end.append(a)
        a = face_parent[a]
    while face_depth[b] > face_depth[a]:
        up_from_start.append(b)
        b = face_parent[b]
    while a != b:
        up_from_end.append(a)
        up_from_start.append(b)
        a, b = face_parent[a], face_parent[b]
    # end 一侧：从子面穿到父面
    for child in up_from_end:
        e = face_parent_edge[child]
        omega[e] += 1.0 if left_of[e] == child else -1.0
    # start 一侧：从父面穿到子面
    for child in up_from_start:
        e = face_parent_edge[child]
        parent = face_parent[child]
        omega[e] += 1.0 if left_of[e] == parent else -1.0
    return omega
