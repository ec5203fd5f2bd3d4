# -*- coding: utf-8 -*-
"""
端到端验收：子目标落在门口、测试迷宫上学到接近最优的策略、远端奖励变化后
只重学 w 比完整重训更快，以及同配置同种子的输出逐字节一致
"""

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import pytest

from dsrlab.agent.baseline import baseline_distal_retrain, baseline_q_training
from dsrlab.agent.dsr import distal_reward_adapt, run_training, train_random_policy_sr
from dsrlab.agent.evaluation import DSRActor, QNetActor, evaluate_policy
from dsrlab.core.config import load_config
from dsrlab.gridworld.env import build_transition_model
from dsrlab.gridworld.maps import load_map
from dsrlab.harness.experiments import (
    METRICS_FILE,
    SNAPSHOT_FILE,
    build_map,
    run_train_experiment,
)
from dsrlab.subgoals.extract import aggregate_topk
from dsrlab.subgoals.sampling import LearnedSR, TabularSR
from dsrlab.tabular.planning import optimal_return

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
TWO_ROOMS_DOOR = (3, 6)
FOUR_ROOMS_DOORS = {(3, 6), (6, 3), (6, 9), (9, 6)}
SEEDS = range(5)


def workers(n: int) -> int:
    return max(1, min(n, os.cpu_count() or 1))


def within(value: float, reference: float, tolerance: float) -> bool:
    return abs(value - reference) <= tolerance * abs(reference)


def greedy_return(actor, grid_map, seed: int) -> float:
    return evaluate_policy(actor, grid_map, episodes=1, seed=seed, epsilon=0.0).mean


def test_identical_runs_are_byte_identical(small_config, tmp_path):
    a = run_train_experiment(small_config, seed=5, output=str(tmp_path / "a"))
    b = run_train_experiment(small_config, seed=5, output=str(tmp_path / "b"))
    for name in (METRICS_FILE, SNAPSHOT_FILE):
        assert (a.output_dir / name).read_bytes() == (b.output_dir / name).read_bytes()


# =============================================================================
# 子目标
# =============================================================================


@pytest.mark.slow
def test_two_rooms_doorway_in_top3():
    grid_map = load_map("two_rooms")
    source = TabularSR.from_map(grid_map, 0.95)
    hits = 0
    for seed in range(20):
        ranking = aggregate_topk(grid_map, source, runs=20, k=3, seed=seed)
        hits += TWO_ROOMS_DOOR in ranking.cells
    assert hits >= 16


@pytest.mark.slow
def test_four_rooms_doorways_in_top6():
    grid_map = load_map("four_rooms")
    source = TabularSR.from_map(grid_map, 0.95)
    ranking = aggregate_topk(grid_map, source, runs=20, k=6, seed=0)
    assert len(FOUR_ROOMS_DOORS & set(ranking.cells)) >= 2


@pytest.mark.slow
def test_two_rooms_doorway_from_learned_sr():
    config = load_config(CONFIG_DIR / "two_rooms_learned.toml")
    grid_map = build_map(config)
    s = config.subgoals
    seeds = range(3)
    with ProcessPoolExecutor(max_workers=workers(len(seeds))) as pool:
        trained = list(pool.map(train_random_policy_sr, [grid_map] * 3, [config] * 3, seeds))
    hits = 0
    for seed, result in zip(seeds, trained):
        ranking = aggregate_topk(
            grid_map,
            LearnedSR(result.params, grid_map),
            runs=s.runs,
            k=s.k,
            seed=seed,
            n_samples=s.n_samples,
            action_mode=s.action_mode,
            dedupe=s.dedupe,
        )
        hits += TWO_ROOMS_DOOR in ranking.cells
    assert hits >= 2


# =============================================================================
# 测试迷宫上的控制与远端奖励变化
# =============================================================================


@pytest.fixture(scope="module")
def maze_config():
    return load_config(CONFIG_DIR / "test_maze.toml")


@pytest.fixture(scope="module")
def maze_runs(maze_config):
    """每个种子各训练一个 DSR 与一个对照 Q 网络"""
    grid_map = build_map(maze_config)
    with ProcessPoolExecutor(max_workers=workers(2 * len(SEEDS))) as pool:
        dsr = [
            pool.submit(run_training, grid_map, maze_config, seed, include_replay=False)
            for seed in SEEDS
        ]
        base = [
            pool.submit(baseline_q_training, grid_map, maze_config, seed, include_replay=False)
            for seed in SEEDS
        ]
        return grid_map, [f.result() for f in dsr], [f.result() for f in base]


@pytest.mark.slow
def test_dsr_reaches_optimal_return_on_test_maze(maze_config, maze_runs):
    grid_map, dsr, base = maze_runs
    model = build_transition_model(grid_map)
    optimal = optimal_return(model, grid_map, maze_config.train.gamma)
    dsr_returns = [greedy_return(DSRActor(r.params), grid_map, i) for i, r in enumerate(dsr)]
    base_returns = [greedy_return(QNetActor(r.params), grid_map, i) for i, r in enumerate(base)]

    assert sum(within(ret, optimal, 0.1) for ret in dsr_returns) >= 4, (optimal, dsr_returns)
    mean_dsr = sum(dsr_returns) / len(dsr_returns)
    mean_base = sum(base_returns) / len(base_returns)
    assert within(mean_base, mean_dsr, 0.1), (mean_dsr, mean_base)


def distal_steps(pool, dsr_snapshots, base_snapshots, config) -> list[tuple]:
    """每个种子 (只重学 w 的达标步数, 完整重训的达标步数)"""
    new_map = dsr_snapshots[0].grid_map().with_rewards(goal_reward=config.distal.goal_reward)
    adapt = [
        pool.submit(distal_reward_adapt, snap, new_map, config, seed)
        for seed, snap in enumerate(dsr_snapshots)
    ]
    retrain = [
        pool.submit(baseline_distal_retrain, snap, new_map, config, seed)
        for seed, snap in enumerate(base_snapshots)
    ]
    return [
        (a.result().steps_to_tolerance, r.result().steps_to_tolerance)
        for a, r in zip(adapt, retrain)
    ]


def adapts_faster(pair: tuple) -> bool:
    adapt, retrain = pair
    return adapt is not None and (retrain is None or adapt < retrain)


@pytest.mark.slow
def test_distal_adaptation_beats_retraining_on_test_maze(maze_config, maze_runs):
    _, dsr, base = maze_runs
    with ProcessPoolExecutor(max_workers=workers(2 * len(dsr))) as pool:
        pairs = distal_steps(
            pool, [r.snapshot for r in dsr], [r.snapshot for r in base], maze_config
        )
    assert sum(adapts_faster(p) for p in pairs) >= 4, pairs


# =============================================================================
# 走廊
# =============================================================================


@pytest.fixture(scope="module")
def corridor_config():
    return load_config(CONFIG_DIR / "corridor_distal.toml")


@pytest.fixture(scope="module")
def corridor_runs(corridor_config):
    grid_map = build_map(corridor_config)
    dsr = [run_training(grid_map, corridor_config, seed, include_replay=False) for seed in SEEDS]
    base = [
        baseline_q_training(grid_map, corridor_config, seed, include_replay=False)
        for seed in SEEDS
    ]
    return grid_map, dsr, base


@pytest.mark.slow
def test_corridor_learned_within_2000_episodes(corridor_config, corridor_runs):
    assert corridor_config.train.total_episodes <= 2000
    grid_map, dsr, _ = corridor_runs
    model = build_transition_model(grid_map)
    optimal = optimal_return(model, grid_map, corridor_config.train.gamma)
    for seed, result in enumerate(dsr):
        assert greedy_return(DSRActor(result.params), grid_map, seed) == pytest.approx(optimal)


@pytest.mark.slow
def test_corridor_distal_adaptation(corridor_config, corridor_runs):
    _, dsr, base = corridor_runs
    with ProcessPoolExecutor(max_workers=workers(2 * len(dsr))) as pool:
        pairs = distal_steps(
            pool, [r.snapshot for r in dsr], [r.snapshot for r in base], corridor_config
        )
    assert sum(adapts_faster(p) for p in pairs) >= 4, pairs
