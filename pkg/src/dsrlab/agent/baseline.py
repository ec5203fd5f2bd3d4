# -*- coding: utf-8 -*-
"""
对照 Q 网络
同一特征主干加线性 Q 头，经验回放加目标网络的一步 Q 学习
"""

from typing import Callable, Optional

import numpy as np

from ..core.config import ExperimentConfig
from ..core.exceptions import SnapshotError, TopologyChangedError
from ..core.logger import get_logger
from ..gridworld.env import GridEnv, build_transition_model, encode_observation
from ..gridworld.maps import GridMap
from ..harness.metrics import DistalRow, TrainingRow
from ..nn.model import NetworkSpec
from ..nn.optim import OptimizerState, sgd_momentum_step
from ..nn.qnet import QNetParams, grad_q_phase, init_qnet_params, q_forward, sync_qnet_target
from ..tabular.planning import value_iteration
from .dsr import (
    DistalResult,
    input_stats,
    observation_shape,
    relative_error,
    steps_to_tolerance,
)
from .replay import ReplayBuffer, record_transition, sample_minibatch
from .snapshot import AgentSnapshot
from .training import LoopState, TrainingResult, make_snapshot, run_episodes, spawn_streams

logger = get_logger()


def select_q_action(
    params: QNetParams, obs: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    """与 DSR 相同的随机数消耗方式: 先抽一个均匀数，再决定探索或贪心"""
    if rng.random() < epsilon:
        return int(rng.integers(params.n_actions))
    return int(np.argmax(q_forward(params, obs)))


def q_learning_step(
    params: QNetParams,
    opt: OptimizerState,
    buffer: ReplayBuffer,
    batch_size: int,
    gamma: float,
    rng: np.random.Generator,
) -> float:
    batch = sample_minibatch(buffer, batch_size, "uniform", rng)
    result = grad_q_phase(
        params, batch.obs, batch.actions, batch.rewards, batch.next_obs, batch.terminal, gamma
    )
    sgd_momentum_step(params, result.grads, opt)
    return result.loss


class QNetLearner:
    """训练循环中的 Q 网络学习器；TD 损失记在 loss_m 一列"""

    kind = "qnet"

    def __init__(self, params: QNetParams, opt: OptimizerState, config: ExperimentConfig):
        self.params = params
        self.opt = opt
        self.train = config.train

    def act(self, obs: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
        return select_q_action(self.params, obs, epsilon, rng)

    def update(
        self, buffer: ReplayBuffer, rng: np.random.Generator, reward_batch_size: int
    ) -> Optional[tuple[float, float, float]]:
        if len(buffer) < self.train.batch_size:
            return None
        loss = q_learning_step(
            self.params, self.opt, buffer, self.train.batch_size, self.train.gamma, rng
        )
        return (0.0, 0.0, loss)

    def after_step(self, global_step: int) -> None:
        if global_step % self.train.target_sync_interval == 0:
            sync_qnet_target(self.params)


def baseline_q_training(
    grid_map: GridMap,
    config: ExperimentConfig,
    seed: Optional[int] = None,
    resume: Optional[AgentSnapshot] = None,
    max_env_steps: Optional[int] = None,
    include_replay: bool = True,
    episode_callback: Optional[Callable[[TrainingRow], None]] = None,
) -> TrainingResult:
    """在与 DSR 相同的回合循环和指标格式下训练对照 Q 网络"""
    obs_shape = observation_shape(grid_map)
    if resume is not None:
        if resume.kind != QNetLearner.kind:
            raise SnapshotError(f"快照类型为 {resume.kind}，无法续跑 Q 网络训练")
        seed = resume.seed
        state = LoopState.from_snapshot(resume, grid_map, obs_shape)
        params, opt = resume.params.copy(), resume.opt.copy()
    else:
        seed = config.seed if seed is None else seed
        state = LoopState.fresh(grid_map, config, seed, obs_shape)
        spec = NetworkSpec.from_config(obs_shape, config.network)
        stats = input_stats(grid_map, config.network)
        params = init_qnet_params(spec, state.streams["init"], stats)
        opt = OptimizerState.create(params, config.train.lr, config.train.momentum)

    budget = config.train.max_env_steps if max_env_steps is None else max_env_steps
    learner = QNetLearner(params, opt, config)
    state = run_episodes(learner, grid_map, config, state, budget, episode_callback)
    logger.info(f"Q 网络训练结束: {state.episode} 回合，{state.global_step} 步")
    snapshot = make_snapshot(learner, state, grid_map, config, seed, include_replay)
    return TrainingResult(snapshot=snapshot, rows=list(state.rows))


def baseline_distal_retrain(
    snapshot: AgentSnapshot,
    new_map: GridMap,
    config: ExperimentConfig,
    seed: Optional[int] = None,
) -> DistalResult:
    """从 Q 网络快照出发在新奖励下继续完整的 Q 学习

    与 w 适应使用相同的交互方式、批次大小、学习率与步数预算；参照值为新地图上
    价值迭代得到的 Q*(start, a*)。

    Raises:
        TopologyChangedError: 新地图的布局与快照不同
        SnapshotError: 快照不是 Q 网络类型
    """
    if snapshot.kind != QNetLearner.kind:
        raise SnapshotError(f"快照类型为 {snapshot.kind}，需要 Q 网络快照")
    if not snapshot.grid_map().same_topology(new_map):
        raise TopologyChangedError("远端奖励实验只允许修改奖励，地图布局必须一致")
    distal, train = config.distal, config.train
    seed = config.seed if seed is None else seed
    streams = spawn_streams(seed)

    params = snapshot.params.copy()
    opt = OptimizerState.create(params, distal.lr, distal.momentum)

    model = build_transition_model(new_map)
    Q_star = value_iteration(model.T, model.R, train.gamma, terminal=model.terminal)
    start_cell = new_map.start_cells[0]
    start = model.index[start_cell]
    a_star = int(np.argmax(Q_star[start]))
    oracle = float(Q_star[start, a_star])
    start_obs = encode_observation(new_map, start_cell)

    buffer = ReplayBuffer(train.replay_capacity, observation_shape(new_map), new_map.step_penalty)
    env = GridEnv(new_map, streams["env"])
    rows: list[DistalRow] = []
    steps, updates = 0, 0
    obs = env.reset()
    while steps < distal.max_env_steps:
        if env.done:
            obs = env.reset()
        t = env.step(select_q_action(params, obs, config.eval.epsilon, streams["act"]))
        record_transition(buffer, t)
        obs = t.next_obs
        steps += 1
        if len(buffer) < distal.batch_size:
            continue

        q_learning_step(params, opt, buffer, distal.batch_size, train.gamma, streams["train"])
        updates += 1
        if updates % train.target_sync_interval == 0:
            sync_qnet_target(params)
        q_start = float(q_forward(params, start_obs)[a_star])
        rows.append(
            DistalRow(
                update=updates,
                steps=steps,
                q_start=q_start,
                oracle=oracle,
                rel_error=relative_error(q_start, oracle),
            )
        )

    reached = steps_to_tolerance(rows, distal.tolerance)
    logger.info(f"Q 网络重训结束: {updates} 次更新，Q* = {oracle:.4f}，达到容差的步数 {reached}")
    return DistalResult(rows=rows, steps_to_tolerance=reached, oracle=oracle, params=params)
