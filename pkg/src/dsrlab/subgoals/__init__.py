# -*- coding: utf-8 -*-
"""
子目标模块
随机策略下的 SR 样本、RBF 亲和图上的归一化割与边界状态排序
"""

from .extract import (
    CutRun,
    SubgoalCandidate,
    SubgoalRanking,
    aggregate_topk,
    rank_boundaries,
    single_cut,
)
from .sampling import (
    LearnedSR,
    SRSampleSet,
    SRSource,
    TabularSR,
    cell_of,
    collect_sr_samples,
    state_id,
)
from .spectral import (
    BRUTE_FORCE_LIMIT,
    AffinityGraph,
    CutResult,
    boundary_scores,
    brute_force_ncut,
    build_affinity,
    eigen_smallest,
    median_bandwidth,
    ncut_value,
    normalized_cut_partition,
    recursive_partition,
    sweep_cut,
)

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "AffinityGraph",
    "CutResult",
    "CutRun",
    "LearnedSR",
    "SRSampleSet",
    "SRSource",
    "SubgoalCandidate",
    "SubgoalRanking",
    "TabularSR",
    "aggregate_topk",
    "boundary_scores",
    "brute_force_ncut",
    "build_affinity",
    "cell_of",
    "collect_sr_samples",
    "eigen_smallest",
    "median_bandwidth",
    "ncut_value",
    "normalized_cut_partition",
    "rank_boundaries",
    "recursive_partition",
    "single_cut",
    "state_id",
    "sweep_cut",
]
