# -*- coding: utf-8 -*-
import dataclasses

import numpy as np
import pytest

from dsrlab.agent.baseline import (
    baseline_distal_retrain,
    baseline_q_training,
    select_q_action,
)
from dsrlab.agent.dsr import (
    distal_reward_adapt,
    greedy_policy_matrix,
    random_policy_config,
    run_training,
    select_action,
    steps_to_tolerance,
    sync_target,
    train_random_policy_sr,
    train_step,
)
from dsrlab.agent.replay import ReplayBuffer, record_transition
from dsrlab.agent.training import restore_streams, spawn_streams, stream_states
from dsrlab.core.exceptions import (
    InsufficientDataError,
    RangeError,
    SnapshotError,
    TopologyChangedError,
)
from dsrlab.gridworld.env import GridEnv, build_transition_model, encode_observation
from dsrlab.gridworld.maps import load_map
from dsrlab.harness.metrics import DistalRow
from dsrlab.harness.persistence import load_snapshot, save_snapshot
from dsrlab.nn.model import greedy_actions
from dsrlab.nn.optim import OptimizerState
from dsrlab.nn.qnet import q_forward
from dsrlab.tabular.sr import q_from_sr, sr_closed_form


def with_episodes(config, n):
    return dataclasses.replace(config, train=dataclasses.replace(config.train, total_episodes=n))


# =============================================================================
# 随机流与单步操作
# =============================================================================


def test_streams_are_independent_and_restorable():
    streams = spawn_streams(3)
    assert streams["env"].random() != streams["act"].random()
    saved = stream_states(streams)
    expected = {name: rng.random() for name, rng in streams.items()}
    restored = restore_streams(saved)
    assert {name: rng.random() for name, rng in restored.items()} == expected


def test_select_action(corridor, small_params):
    obs = encode_observation(corridor, (1, 1))
    assert select_action(small_params, obs, 0.0, np.random.default_rng(0)) == int(
        greedy_actions(small_params, obs)[0]
    )
    a = [select_action(small_params, obs, 1.0, np.random.default_rng(s)) for s in range(20)]
    assert set(a) <= {0, 1, 2, 3} and len(set(a)) > 1
    with pytest.raises(RangeError):
        select_action(small_params, obs, 1.5, np.random.default_rng(0))

    n = 10_000
    rng = np.random.default_rng(7)
    draws = [select_action(small_params, obs, 1.0, rng) for _ in range(n)]
    counts = np.bincount(draws, minlength=4)
    sigma = np.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(counts - n / 4) <= 3 * sigma)

    greedy = int(greedy_actions(small_params, obs)[0])
    hits = sum(select_action(small_params, obs, 0.1, rng) == greedy for _ in range(n))
    p = 0.9 + 0.1 / 4
    assert abs(hits / n - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_sync_target_copies(small_params):
    small_params["alpha.W"] += 1.0
    sync_target(small_params)
    assert np.array_equal(small_params["alpha_prev.W"], small_params["alpha.W"])
    small_params["alpha.W"] += 1.0
    assert not np.array_equal(small_params["alpha_prev.W"], small_params["alpha.W"])


def test_train_step_phase_order(corridor, small_params, small_config):
    buffer = ReplayBuffer(100, small_params.spec.obs_shape, corridor.step_penalty)
    env = GridEnv(corridor, 0)
    rng = np.random.default_rng(0)
    opt = OptimizerState.create(small_params, 0.01, 0.9)
    with pytest.raises(InsufficientDataError):
        train_step(small_params, opt, buffer, small_config.train, small_config.network, rng)

    env.reset()
    for action in (3, 2, 2, 0, 2):
        if env.done:
            env.reset()
        record_transition(buffer, env.step(action))

    before = small_params.copy()
    seen = []

    def hook(phase, params):
        seen.append((phase, params.copy()))

    _, _, report = train_step(
        small_params, opt, buffer, small_config.train, small_config.network, rng, phase_hook=hook
    )
    assert [phase for phase, _ in seen] == ["reward", "sr"]
    after_reward, after_sr = seen[0][1], seen[1][1]
    assert after_reward.equals(before, groups=("alpha", "alpha_prev"))
    assert not after_reward.equals(before, groups=("w",))
    assert after_sr.equals(after_reward, groups=("theta", "theta_tilde", "w", "alpha_prev"))
    assert not after_sr.equals(after_reward, groups=("alpha",))
    assert all(np.isfinite(report.as_tuple()))


# =============================================================================
# 训练
# =============================================================================


def test_training_is_deterministic(corridor, small_config):
    a = run_training(corridor, small_config, seed=5)
    b = run_training(corridor, small_config, seed=5)
    assert a.params.equals(b.params)
    assert a.rows == b.rows
    assert len(a.rows) == small_config.train.total_episodes
    c = run_training(corridor, small_config, seed=6)
    assert not a.params.equals(c.params)


def test_training_rows(corridor, small_config):
    result = run_training(corridor, small_config, seed=0)
    steps = [row.steps for row in result.rows]
    assert steps == sorted(steps)
    assert all(0.1 - 1e-9 <= row.eps <= 1.0 for row in result.rows)
    assert result.snapshot.episode == len(result.rows)
    assert result.snapshot.global_step == steps[-1]
    assert result.params.all_finite()


def test_resume_matches_uninterrupted_run(corridor, small_config, tmp_path):
    full = run_training(corridor, small_config, seed=9)
    half = run_training(corridor, with_episodes(small_config, 3), seed=9)
    path = save_snapshot(half.snapshot, tmp_path / "half.json")
    resumed = run_training(corridor, small_config, resume=load_snapshot(path))
    assert resumed.params.equals(full.params)
    assert resumed.rows == full.rows
    assert resumed.snapshot.global_step == full.snapshot.global_step


def test_budget_checked_at_episode_boundary(corridor, small_config):
    config = with_episodes(small_config, 1000)
    result = run_training(corridor, config, seed=0, max_env_steps=20)
    assert result.snapshot.global_step >= 20
    assert all(row.steps < 20 for row in result.rows[:-1])
    assert len(result.rows) < 1000


def test_resume_rejects_other_layout(corridor, small_config):
    snapshot = run_training(corridor, with_episodes(small_config, 1), seed=0).snapshot
    with pytest.raises(TopologyChangedError):
        run_training(load_map("open_room_5"), small_config, resume=snapshot)


def test_random_policy_sr_ignores_reward(corridor, small_config):
    result = train_random_policy_sr(corridor, small_config, seed=0)
    assert len(result.rows) == small_config.subgoals.train_episodes
    assert all(row.eps == 1.0 for row in result.rows)
    assert result.snapshot.replay is None
    # 目标格不终止，回合只因步数上限结束
    assert all(row.steps % corridor.step_limit == 0 for row in result.rows)
    assert result.snapshot.map_params["goal_terminal"] is False
    config = random_policy_config(small_config)
    assert config.train.gamma == small_config.subgoals.gamma
    assert config.train.successor_target == "uniform"
    assert config.network.reward_weight == 0.0


# =============================================================================
# 远端奖励变化
# =============================================================================


def test_steps_to_tolerance():
    def rows(errors):
        return [DistalRow(update=i + 1, steps=10 * (i + 1), q_start=0.0, oracle=1.0, rel_error=e)
                for i, e in enumerate(errors)]

    assert steps_to_tolerance(rows([0.5, 0.01, 0.2, 0.04, 0.03]), 0.05) == 40
    assert steps_to_tolerance(rows([0.5, 0.2]), 0.05) is None
    assert steps_to_tolerance(rows([0.01, 0.02]), 0.05) == 10
    assert steps_to_tolerance([], 0.05) is None


def test_distal_adapt_updates_only_w(corridor, small_config):
    snapshot = run_training(corridor, small_config, seed=1).snapshot
    new_map = corridor.with_rewards(goal_reward=3.0)
    result = distal_reward_adapt(snapshot, new_map, small_config, seed=1)

    assert result.params.equals(snapshot.params, groups=("theta", "alpha", "theta_tilde", "alpha_prev"))
    assert not result.params.equals(snapshot.params, groups=("w",))
    assert len(result.rows) == small_config.distal.max_env_steps - small_config.distal.batch_size + 1
    assert [row.update for row in result.rows] == list(range(1, len(result.rows) + 1))

    model = build_transition_model(new_map)
    policy = greedy_policy_matrix(snapshot.params, new_map, model)
    Q = q_from_sr(sr_closed_form(model.T, policy, small_config.train.gamma, model.terminal), model.R)
    start = model.index[new_map.start_cells[0]]
    assert result.oracle == pytest.approx(Q[start, int(np.argmax(policy[start]))])
    assert all(row.oracle == result.oracle for row in result.rows)


def test_distal_adapt_is_deterministic(corridor, small_config):
    snapshot = run_training(corridor, small_config, seed=1).snapshot
    new_map = corridor.with_rewards(goal_reward=3.0)
    a = distal_reward_adapt(snapshot, new_map, small_config, seed=2)
    b = distal_reward_adapt(snapshot, new_map, small_config, seed=2)
    assert a.rows == b.rows


def test_distal_rejects_layout_change(corridor, small_config):
    snapshot = run_training(corridor, with_episodes(small_config, 1), seed=0).snapshot
    with pytest.raises(TopologyChangedError):
        distal_reward_adapt(snapshot, load_map("open_room_5"), small_config)


# =============================================================================
# 对照 Q 网络
# =============================================================================


def test_baseline_training(corridor, small_config):
    result = baseline_q_training(corridor, small_config, seed=0)
    assert result.snapshot.kind == "qnet"
    assert len(result.rows) == small_config.train.total_episodes
    assert all(row.loss_r == 0.0 and row.loss_a == 0.0 for row in result.rows)
    again = baseline_q_training(corridor, small_config, seed=0)
    assert again.params.equals(result.params)


def test_snapshot_kinds_are_checked(corridor, small_config):
    dsr = run_training(corridor, with_episodes(small_config, 1), seed=0).snapshot
    qnet = baseline_q_training(corridor, with_episodes(small_config, 1), seed=0).snapshot
    with pytest.raises(SnapshotError):
        run_training(corridor, small_config, resume=qnet)
    with pytest.raises(SnapshotError):
        baseline_q_training(corridor, small_config, resume=dsr)
    with pytest.raises(SnapshotError):
        baseline_distal_retrain(dsr, corridor, small_config)


def test_baseline_distal_retrain(corridor, small_config):
    snapshot = baseline_q_training(corridor, small_config, seed=0).snapshot
    new_map = corridor.with_rewards(goal_reward=3.0)
    result = baseline_distal_retrain(snapshot, new_map, small_config, seed=0)
    # Q*(start, East) = -0.5 + 0.99 * 3
    assert result.oracle == pytest.approx(-0.5 + 0.99 * 3.0)
    assert len(result.rows) == small_config.distal.max_env_steps - small_config.distal.batch_size + 1


def test_select_q_action_greedy(corridor, small_config):
    params = baseline_q_training(corridor, with_episodes(small_config, 1), seed=0).params
    obs = encode_observation(corridor, (1, 1))
    assert select_q_action(params, obs, 0.0, np.random.default_rng(0)) == int(
        np.argmax(q_forward(params, obs))
    )
