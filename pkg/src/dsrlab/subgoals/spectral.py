# -*- coding: utf-8 -*-
"""
谱划分
RBF 亲和图、随机游走归一化拉普拉斯的最小特征对、归一化割与穷举对照
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core.const import EIGEN_METHODS, PARTITION_METHODS
from ..core.exceptions import (
    ConvergenceFailureError,
    DegenerateBandwidthError,
    DimensionMismatchError,
    InsufficientDataError,
    RangeError,
    TooLargeError,
)
from .sampling import SRSampleSet

BRUTE_FORCE_LIMIT = 16


# =============================================================================
# 亲和图
# =============================================================================


@dataclass
class AffinityGraph:
    """对称亲和矩阵 W 与度向量 D(i,i) = Σ_j w_ij

    state_ids[i] 是第 i 个节点对应的状态编号。
    """

    W: np.ndarray
    sigma: float
    degrees: np.ndarray
    state_ids: np.ndarray

    @property
    def n(self) -> int:
        return int(self.W.shape[0])

    @classmethod
    def from_weights(
        cls, W: np.ndarray, state_ids: Optional[np.ndarray] = None, sigma: float = float("nan")
    ) -> "AffinityGraph":
        """由手工给定的权重构图

        Raises:
            DimensionMismatchError: W 不是方阵、不对称、取值不在 [0, 1] 或有零度节点
        """
        W = np.asarray(W, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionMismatchError(f"亲和矩阵必须是方阵，实际为 {W.shape}")
        if not np.array_equal(W, W.T):
            raise DimensionMismatchError("亲和矩阵必须对称")
        if np.any(W < 0.0) or np.any(W > 1.0):
            raise DimensionMismatchError("亲和矩阵的元素必须在 [0, 1] 内")
        degrees = W.sum(axis=1)
        if np.any(degrees <= 0.0):
            raise DimensionMismatchError("存在度为 0 的节点")
        ids = np.arange(W.shape[0]) if state_ids is None else np.asarray(state_ids)
        return cls(W=W, sigma=sigma, degrees=degrees, state_ids=ids)

    def subgraph(self, nodes: np.ndarray) -> "AffinityGraph":
        W = self.W[np.ix_(nodes, nodes)]
        return AffinityGraph(
            W=W, sigma=self.sigma, degrees=W.sum(axis=1), state_ids=self.state_ids[nodes]
        )

    def components(self) -> np.ndarray:
        """连通分量编号 (按 w_ij > 0 连边)，编号按首个节点出现的顺序"""
        labels = np.full(self.n, -1, dtype=np.intp)
        adjacency = self.W > 0.0
        current = 0
        for root in range(self.n):
            if labels[root] >= 0:
                continue
            stack = [root]
            labels[root] = current
            while stack:
                i = stack.pop()
                for j in np.flatnonzero(adjacency[i] & (labels < 0)):
                    labels[j] = current
                    stack.append(int(j))
            current += 1
        return labels


def pairwise_sq_distances(X: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def median_bandwidth(X: np.ndarray) -> float:
    """中位数启发式: 所有样本对欧氏距离的中位数"""
    d2 = pairwise_sq_distances(X)
    iu = np.triu_indices(X.shape[0], k=1)
    return float(np.median(np.sqrt(d2[iu])))


def build_affinity(samples: SRSampleSet, sigma: Optional[float] = None) -> AffinityGraph:
    """w_ij = exp(-||m_i - m_j||^2 / (2σ^2))

    Args:
        samples: SR 样本集
        sigma: RBF 带宽，None 时取样本对距离的中位数

    Raises:
        InsufficientDataError: 样本少于 2 个
        DegenerateBandwidthError: σ ≤ 0 (包括中位数为 0)
    """
    if len(samples) < 2:
        raise InsufficientDataError(f"构图至少需要 2 个样本，实际为 {len(samples)}")
    X = samples.vectors
    if sigma is None:
        sigma = median_bandwidth(X)
    if not sigma > 0.0:
        raise DegenerateBandwidthError(f"RBF 带宽必须为正，实际为 {sigma}")
    W = np.exp(-pairwise_sq_distances(X) / (2.0 * sigma**2))
    return AffinityGraph(
        W=W, sigma=float(sigma), degrees=W.sum(axis=1), state_ids=samples.state_ids.copy()
    )


# =============================================================================
# 特征对
# =============================================================================


def _orient(vectors: np.ndarray) -> np.ndarray:
    """单位化并令绝对值最大的分量为正"""
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _symmetric_laplacian(graph: AffinityGraph) -> tuple[np.ndarray, np.ndarray]:
    d_inv_sqrt = 1.0 / np.sqrt(graph.degrees)
    L_sym = np.eye(graph.n) - d_inv_sqrt[:, None] * graph.W * d_inv_sqrt[None, :]
    return 0.5 * (L_sym + L_sym.T), d_inv_sqrt


def eigen_smallest(
    graph: AffinityGraph,
    k: int = 2,
    method: str = "dense",
    max_iter: int = 20000,
    tol: float = 1e-10,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """D^-1(D - W) 最小的 k 个特征对，特征值升序

    在对称形式 L_sym = D^-1/2 (D - W) D^-1/2 上求解后回代 v = D^-1/2 u。
    dense 使用完整的对称特征分解；power 对 2I - L_sym 做带正交投影收缩的幂迭代。

    Returns:
        (特征值 (k,), 特征向量 (n, k))，每列单位化且绝对值最大的分量为正

    Raises:
        ConvergenceFailureError: power 模式超过迭代上限
    """
    if method not in EIGEN_METHODS:
        raise RangeError("subgoals.eigen_method", f"可选值: {EIGEN_METHODS}")
    if not 1 <= k <= graph.n:
        raise DimensionMismatchError(f"k 必须在 [1, {graph.n}] 内，实际为 {k}")
    L_sym, d_inv_sqrt = _symmetric_laplacian(graph)

    if method == "dense":
        values, U = np.linalg.eigh(L_sym)
        values, U = values[:k], U[:, :k]
    else:
        values, U = _deflated_power(L_sym, k, max_iter, tol, seed)

    return values, _orient(d_inv_sqrt[:, None] * U)


def _deflated_power(
    L_sym: np.ndarray, k: int, max_iter: int, tol: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    n = L_sym.shape[0]
    B = 2.0 * np.eye(n) - L_sym
    rng = np.random.default_rng(seed)
    found: list[np.ndarray] = []
    values = np.empty(k)
    for j in range(k):
        x = rng.normal(size=n)
        for _ in range(max_iter):
            for u in found:
                x -= (u @ x) * u
            x /= np.linalg.norm(x)
            y = B @ x
            for u in found:
                y -= (u @ y) * u
            lam = float(x @ y)
            if np.linalg.norm(y - lam * x) < tol:
                break
            x = y
        else:
            raise ConvergenceFailureError(f"幂迭代在 {max_iter} 次内未收敛 (第 {j + 1} 个特征对)")
        values[j] = 2.0 - lam
        found.append(x)
    return values, np.stack(found, axis=1)


# =============================================================================
# 归一化割
# =============================================================================


@dataclass
class CutResult:
    """二分结果；labels 为 True 的一侧不含最小的状态编号"""

    labels: np.ndarray
    ncut_value: float
    boundary_states: frozenset[int]
    fiedler_value: float
    boundary_scores: dict[int, float] = field(default_factory=dict)


def ncut_value(graph: AffinityGraph, labels: np.ndarray) -> float:
    """cut(A, B)·(1/vol(A) + 1/vol(B))"""
    labels = np.asarray(labels, dtype=bool)
    cut = float(graph.W[np.ix_(labels, ~labels)].sum())
    vol_a = float(graph.degrees[labels].sum())
    vol_b = float(graph.degrees[~labels].sum())
    return cut * (1.0 / vol_a + 1.0 / vol_b)


def canonical_labels(graph: AffinityGraph, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=bool)
    anchor = int(np.argmin(graph.state_ids))
    return ~labels if labels[anchor] else labels.copy()


def boundary_scores(graph: AffinityGraph, labels: np.ndarray) -> dict[int, float]:
    """割边端点的得分

    只计权重不低于割边权重中位数的边，每个端点累加这些边的权重；多个样本
    对应同一状态时得分合并到该状态编号。
    """
    labels = np.asarray(labels, dtype=bool)
    a_idx, b_idx = np.flatnonzero(labels), np.flatnonzero(~labels)
    cross = graph.W[np.ix_(a_idx, b_idx)]
    positive = cross[cross > 0.0]
    if positive.size == 0:
        return {}
    keep = np.where(cross >= np.median(positive), cross, 0.0)
    node_scores = np.zeros(graph.n)
    node_scores[a_idx] = keep.sum(axis=1)
    node_scores[b_idx] = keep.sum(axis=0)
    scores: dict[int, float] = {}
    for i in np.flatnonzero(node_scores > 0.0):
        sid = int(graph.state_ids[i])
        scores[sid] = scores.get(sid, 0.0) + float(node_scores[i])
    return scores


def _make_result(graph: AffinityGraph, labels: np.ndarray, fiedler_value: float) -> CutResult:
    labels = canonical_labels(graph, labels)
    scores = boundary_scores(graph, labels)
    return CutResult(
        labels=labels,
        ncut_value=ncut_value(graph, labels),
        boundary_states=frozenset(scores),
        fiedler_value=float(fiedler_value),
        boundary_scores=scores,
    )


def sweep_cut(graph: AffinityGraph, order: np.ndarray) -> np.ndarray:
    """沿给定顺序的所有前缀划分中 Ncut 最小者 (平局取最短前缀)"""
    W, d = graph.W, graph.degrees
    total = float(d.sum())
    in_a = np.zeros(graph.n, dtype=bool)
    cut, vol_a = 0.0, 0.0
    best, best_i = np.inf, 1
    for i, v in enumerate(order[:-1], start=1):
        cut += d[v] - W[v, v] - 2.0 * W[v, in_a].sum()
        vol_a += d[v]
        in_a[v] = True
        value = cut * (1.0 / vol_a + 1.0 / (total - vol_a))
        if value < best:
            best, best_i = value, i
    labels = np.zeros(graph.n, dtype=bool)
    labels[order[:best_i]] = True
    return labels


def normalized_cut_partition(
    graph: AffinityGraph,
    method: str = "sweep",
    eigen_method: str = "dense",
    seed: int = 0,
) -> CutResult:
    """用第二小特征向量近似最小归一化割

    图不连通时直接以第一个节点所在的连通分量为一侧，Ncut 为 0。

    Args:
        graph: 亲和图，至少 2 个节点
        method: ``sweep`` 在排序后的特征向量上扫描阈值；``sign`` 按符号切分
        eigen_method: 传给 eigen_smallest
        seed: power 模式的初始向量种子
    """
    if method not in PARTITION_METHODS:
        raise RangeError("subgoals.partition", f"可选值: {PARTITION_METHODS}")
    if graph.n < 2:
        raise InsufficientDataError("划分至少需要 2 个节点")

    components = graph.components()
    if components.max() > 0:
        return _make_result(graph, components == components[0], 0.0)

    values, vectors = eigen_smallest(graph, 2, eigen_method, seed=seed)
    fiedler = vectors[:, 1]
    labels = fiedler > 0.0
    if method == "sweep" or labels.all() or not labels.any():
        labels = sweep_cut(graph, np.argsort(fiedler, kind="stable"))
    return _make_result(graph, labels, values[1])


def brute_force_ncut(graph: AffinityGraph) -> CutResult:
    """穷举所有非空二分的精确最小 Ncut

    Raises:
        TooLargeError: 节点数超过 16
    """
    n = graph.n
    if n > BRUTE_FORCE_LIMIT:
        raise TooLargeError(f"穷举最多支持 {BRUTE_FORCE_LIMIT} 个节点，实际为 {n}")
    if n < 2:
        raise InsufficientDataError("划分至少需要 2 个节点")

    # 最后一个节点固定在 B 侧，每个二分只枚举一次
    masks = np.arange(1, 2 ** (n - 1))
    X = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)
    cut = np.einsum("mi,ij,mj->m", X, graph.W, 1.0 - X)
    vol_a = X @ graph.degrees
    vol_b = graph.degrees.sum() - vol_a
    values = cut * (1.0 / vol_a + 1.0 / vol_b)
    best = int(np.argmin(values))

    fiedler = float(eigen_smallest(graph, 2)[0][1])
    return _make_result(graph, X[best].astype(bool), fiedler)


def recursive_partition(
    graph: AffinityGraph,
    n_segments: int,
    max_ncut: float = 0.5,
    method: str = "sweep",
    eigen_method: str = "dense",
) -> tuple[np.ndarray, list[CutResult]]:
    """反复切分最大的一段，直到段数达到 n_segments 或 Ncut 超过 max_ncut

    Returns:
        (每个节点的段号，按段内最小状态编号排序；每次被接受的切分)
    """
    if n_segments < 1:
        raise RangeError("subgoals.segments", "至少为 1")
    segments: list[np.ndarray] = [np.arange(graph.n)]
    cuts: list[CutResult] = []
    while len(segments) < n_segments:
        sizes = [len(s) for s in segments]
        target = int(np.argmax(sizes))
        nodes = segments[target]
        if len(nodes) < 2:
            break
        result = normalized_cut_partition(graph.subgraph(nodes), method, eigen_method)
        if result.ncut_value > max_ncut:
            break
        cuts.append(result)
        segments[target:target + 1] = [nodes[~result.labels], nodes[result.labels]]

    segments.sort(key=lambda s: int(graph.state_ids[s].min()))
    labels = np.empty(graph.n, dtype=np.intp)
    for label, nodes in enumerate(segments):
        labels[nodes] = label
    return labels, cuts
