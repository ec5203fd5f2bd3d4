# -*- coding: utf-8 -*-
"""
子目标提取
重复 采样 → 构图 → 切分，统计每个状态落在割边界上的次数，取前 k 个
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core.exceptions import RangeError
from ..core.logger import get_logger
from ..gridworld.maps import Cell, GridMap
from .sampling import SRSampleSet, SRSource, cell_of, collect_sr_samples
from .spectral import AffinityGraph, CutResult, build_affinity, normalized_cut_partition

logger = get_logger()


@dataclass(frozen=True)
class SubgoalCandidate:
    state_id: int
    cell: Cell
    count: int
    score: float
    rank: int


@dataclass
class CutRun:
    """单次重复的样本、图与切分"""

    samples: SRSampleSet
    graph: AffinityGraph
    cut: CutResult


@dataclass
class SubgoalRanking:
    candidates: list[SubgoalCandidate]
    counts: dict[int, int] = field(default_factory=dict)
    scores: dict[int, float] = field(default_factory=dict)
    runs: list[CutRun] = field(default_factory=list)

    @property
    def cells(self) -> list[Cell]:
        return [c.cell for c in self.candidates]


def single_cut(
    grid_map: GridMap,
    source: SRSource,
    n_samples: int,
    seed: int | np.random.Generator,
    sigma: Optional[float] = None,
    action_mode: str = "taken",
    dedupe: bool = True,
    partition: str = "sweep",
    eigen_method: str = "dense",
) -> CutRun:
    samples = collect_sr_samples(grid_map, source, n_samples, seed, action_mode, dedupe)
    graph = build_affinity(samples, sigma)
    return CutRun(samples, graph, normalized_cut_partition(graph, partition, eigen_method))


def rank_boundaries(
    grid_map: GridMap, cuts: list[CutResult], k: int
) -> tuple[list[SubgoalCandidate], dict[int, int], dict[int, float]]:
    """按 (次数降序, 累计得分降序, 状态编号升序) 排序"""
    counts: dict[int, int] = {}
    scores: dict[int, float] = {}
    for cut in cuts:
        for sid in cut.boundary_states:
            counts[sid] = counts.get(sid, 0) + 1
            scores[sid] = scores.get(sid, 0.0) + cut.boundary_scores.get(sid, 0.0)
    ordered = sorted(counts, key=lambda s: (-counts[s], -scores[s], s))
    candidates = [
        SubgoalCandidate(
            state_id=sid,
            cell=cell_of(grid_map, sid),
            count=counts[sid],
            score=scores[sid],
            rank=rank,
        )
        for rank, sid in enumerate(ordered[:k], start=1)
    ]
    return candidates, counts, scores


def aggregate_topk(
    grid_map: GridMap,
    source: SRSource,
    runs: int,
    k: int,
    seed: int,
    n_samples: int = 2000,
    sigma: Optional[float] = None,
    action_mode: str = "taken",
    dedupe: bool = True,
    partition: str = "sweep",
    eigen_method: str = "dense",
    workers: int = 1,
) -> SubgoalRanking:
    """重复 runs 次独立采样与切分，返回边界次数最多的 k 个状态

    每次重复使用由 seed 派生的独立随机流，结果与 workers 无关。

    Raises:
        RangeError: runs 或 k 小于 1
    """
    if runs < 1:
        raise RangeError("subgoals.runs", "至少为 1")
    if k < 1:
        raise RangeError("subgoals.k", "至少为 1")
    seeds = np.random.SeedSequence(seed).spawn(runs)

    def one(run_seed: np.random.SeedSequence) -> CutRun:
        return single_cut(
            grid_map,
            source,
            n_samples,
            np.random.default_rng(run_seed),
            sigma,
            action_mode,
            dedupe,
            partition,
            eigen_method,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    for i, run in enumerate(results):
        logger.debug(
            f"第 {i} 次切分: {run.graph.n} 个节点，Ncut = {run.cut.ncut_value:.4f}，"
            f"边界 {len(run.cut.boundary_states)} 个状态"
        )
    candidates, counts, scores = rank_boundaries(grid_map, [r.cut for r in results], k)
    return SubgoalRanking(candidates=candidates, counts=counts, scores=scores, runs=results)
