# -*- coding: utf-8 -*-
"""
对照检查
表格 SR 残差、SR 与策略评估的一致性、TD 不动点、两阶段梯度的有限差分、
谱切分与穷举 Ncut 的比较
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core.logger import get_logger
from ..gridworld.env import build_transition_model, encode_observation
from ..gridworld.maps import BUILTIN_MAPS, GridMap, load_map, parse_map, random_maze
from ..nn.gradcheck import check_q_phase, check_reward_phase, check_sr_phase
from ..nn.model import NetworkSpec, grad_sr_phase, init_params
from ..nn.qnet import init_qnet_params
from ..subgoals.sampling import SRSampleSet
from ..subgoals.spectral import (
    AffinityGraph,
    brute_force_ncut,
    build_affinity,
    eigen_smallest,
    normalized_cut_partition,
)
from ..tabular.planning import policy_evaluation, uniform_policy
from ..tabular.sr import (
    enumerate_transitions,
    q_from_sr,
    sr_closed_form,
    sr_identity,
    sr_residual,
    sr_td_sweep,
)

logger = get_logger()

SUITES = ("tabular", "td", "gradient", "ncut")


@dataclass(frozen=True)
class OracleResult:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool

    @classmethod
    def at_most(cls, suite: str, name: str, value: float, threshold: float) -> "OracleResult":
        return cls(suite, name, float(value), float(threshold), bool(value <= threshold))


def oracle_maps() -> list[GridMap]:
    maps = [load_map(name) for name in sorted(BUILTIN_MAPS)]
    maps.append(parse_map(random_maze(15, 15, seed=0, water_fraction=0.1), name="random_maze_15"))
    return maps


# =============================================================================
# 表格
# =============================================================================


def tabular_suite(gamma: float = 0.99) -> list[OracleResult]:
    """闭式 SR 的递推残差与 Q = M·R 和直接策略评估的差"""
    results = []
    for grid_map in oracle_maps():
        model = build_transition_model(grid_map)
        policy = uniform_policy(model.n_states, model.n_actions)
        M = sr_closed_form(model.T, policy, gamma, model.terminal)
        residual = sr_residual(M, model.T, policy, gamma, model.terminal)
        Q_direct = policy_evaluation(model.T, model.R, policy, gamma, model.terminal)
        gap = float(np.max(np.abs(q_from_sr(M, model.R) - Q_direct)))
        results.append(OracleResult.at_most("tabular", f"{grid_map.name} SR 残差", residual, 1e-10))
        results.append(OracleResult.at_most("tabular", f"{grid_map.name} M·R 与 Q^π", gap, 1e-8))
    return results


def td_fixed_point(
    grid_map: GridMap, gamma: float = 0.95, max_sweeps: int = 2000, tol: float = 1e-6
) -> float:
    """以 lr=1 反复扫过全部单步转移直至不动，返回与闭式 SR 的最大偏差"""
    model = build_transition_model(grid_map)
    policy = uniform_policy(model.n_states, model.n_actions)
    transitions = enumerate_transitions(model)
    M = sr_identity(model.n_states, model.n_actions)
    for _ in range(max_sweeps):
        updated = sr_td_sweep(M, transitions, policy, gamma, 1.0, model.terminal)
        change = float(np.max(np.abs(updated - M)))
        M = updated
        if change < tol:
            break
    exact = sr_closed_form(model.T, policy, gamma, model.terminal)
    return float(np.max(np.abs(M - exact)))


def td_suite() -> list[OracleResult]:
    gap = td_fixed_point(load_map("test_maze"))
    return [OracleResult.at_most("td", "test_maze TD 不动点", gap, 1e-2)]


# =============================================================================
# 梯度
# =============================================================================


def _random_batch(grid_map: GridMap, rng: np.random.Generator, batch: int):
    cells = grid_map.passable_cells()
    picks = rng.integers(len(cells), size=(2, batch))
    obs = np.stack([encode_observation(grid_map, cells[i]) for i in picks[0]])
    next_obs = np.stack([encode_observation(grid_map, cells[i]) for i in picks[1]])
    actions = rng.integers(4, size=batch)
    rewards = rng.normal(size=batch)
    terminal = rng.random(batch) < 0.25
    return obs, actions, rewards, next_obs, terminal


def gradient_suite(
    seeds: int = 20, epsilon: float = 1e-5, tolerance: float = 1e-4, batch: int = 8
) -> list[OracleResult]:
    """小网络上两个阶段 (以及对照 Q 网络) 的中心差分检查"""
    grid_map = load_map("open_room_5")
    obs_shape = encode_observation(grid_map, grid_map.start_cells[0]).shape
    worst = {"reward": 0.0, "sr": 0.0, "q": 0.0, "sr_zero": 0.0}
    failed = {key: False for key in worst}
    for seed in range(seeds):
        rng = np.random.default_rng(seed)
        activation = "relu" if seed % 2 else "linear"
        spec = NetworkSpec(
            obs_shape=obs_shape, hidden=(12,), feature_dim=6, phi_activation=activation
        )
        params = init_params(spec, rng)
        params["alpha_prev.W"] = params["alpha.W"] + 0.1 * rng.normal(size=params["alpha.W"].shape)
        obs, actions, rewards, next_obs, terminal = _random_batch(grid_map, rng, batch)
        kwargs = {"epsilon": epsilon, "tolerance": tolerance, "n_coords": 40, "seed": seed}

        reports = {
            "reward": check_reward_phase(params, obs, rewards, **kwargs),
            "sr": check_sr_phase(params, obs, actions, next_obs, terminal, 0.99, **kwargs),
            "q": check_q_phase(
                init_qnet_params(spec, rng), obs, actions, rewards, next_obs, terminal, 0.99, **kwargs
            ),
        }
        for key, report in reports.items():
            worst[key] = max(worst[key], report.max_rel_error)
            failed[key] |= not report.passed

        full = grad_sr_phase(params, obs, actions, next_obs, terminal, 0.99).full(params)
        others = [np.max(np.abs(g)) for k, g in full.items() if not k.startswith("alpha")]
        worst["sr_zero"] = max(worst["sr_zero"], float(max(others, default=0.0)))

    labels = {"reward": "奖励阶段", "sr": "SR 阶段", "q": "Q 网络"}
    results = [
        OracleResult(
            "gradient", f"{title} ({seeds} 个种子)", worst[key], tolerance, not failed[key]
        )
        for key, title in labels.items()
    ]
    results.append(
        OracleResult.at_most("gradient", "SR 阶段对 θ/w/θ̃ 的梯度", worst["sr_zero"], 0.0)
    )
    return results


# =============================================================================
# 归一化割
# =============================================================================


def random_point_graph(rng: np.random.Generator, n: int = 10, dim: int = 3) -> AffinityGraph:
    """随机点云上中位数带宽的 RBF 图"""
    X = rng.normal(size=(n, dim))
    return build_affinity(SRSampleSet(np.arange(n), np.zeros(n, dtype=np.intp), X))


def two_cluster_graph(
    sizes: tuple[int, int] = (5, 5), inside: float = 0.9, across: float = 0.01
) -> AffinityGraph:
    n = sum(sizes)
    W = np.full((n, n), across)
    W[: sizes[0], : sizes[0]] = inside
    W[sizes[0]:, sizes[0]:] = inside
    np.fill_diagonal(W, 1.0)
    return AffinityGraph.from_weights(W)


def spectral_gap_ratio(graph: AffinityGraph) -> float:
    values, _ = eigen_smallest(graph, 3)
    return float(values[2] / values[1])


def ncut_suite(n_graphs: int = 50, seed: int = 0, max_ratio: float = 1.5) -> list[OracleResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_graphs):
        graph = random_point_graph(rng)
        spectral = normalized_cut_partition(graph).ncut_value
        exact = brute_force_ncut(graph).ncut_value
        worst = max(worst, spectral / exact if exact > 0 else (0.0 if spectral == 0 else np.inf))

    clusters = two_cluster_graph()
    gap = spectral_gap_ratio(clusters)
    spectral = normalized_cut_partition(clusters)
    exact = brute_force_ncut(clusters)
    same = bool(np.array_equal(spectral.labels, exact.labels))
    return [
        OracleResult.at_most("ncut", f"谱切分 / 穷举最优 ({n_graphs} 个随机图)", worst, max_ratio),
        OracleResult("ncut", f"双簇图精确最优 (谱间隙比 {gap:.1f})", float(same), 1.0, same and gap >= 10.0),
    ]


SUITE_RUNNERS: dict[str, Callable[[], list[OracleResult]]] = {
    "tabular": tabular_suite,
    "td": td_suite,
    "gradient": gradient_suite,
    "ncut": ncut_suite,
}


def run_oracle_suites(suites: Optional[list[str]] = None) -> list[OracleResult]:
    """依次运行选定的检查，默认全部"""
    results: list[OracleResult] = []
    for name in suites or list(SUITES):
        logger.info(f"运行对照检查: {name}")
        results.extend(SUITE_RUNNERS[name]())
    return results
