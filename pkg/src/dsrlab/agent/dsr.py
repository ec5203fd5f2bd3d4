# -*- coding: utf-8 -*-
"""
深度后继表示智能体
交替的两阶段更新、目标参数同步、训练入口与远端奖励变化后的 w 适应
"""

import dataclasses
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from ..core.config import ExperimentConfig, NetworkConfig, TrainConfig
from ..core.exceptions import (
    InsufficientDataError,
    RangeError,
    SnapshotError,
    TopologyChangedError,
)
from ..core.logger import get_logger
from ..gridworld.env import (
    N_CHANNELS,
    GridEnv,
    build_transition_model,
    encode_observation,
    observation_stats,
)
from ..gridworld.maps import GridMap
from ..harness.metrics import DistalRow, TrainingRow
from ..nn.model import (
    ModelParams,
    NetworkSpec,
    forward_features,
    grad_reward_phase,
    grad_sr_phase,
    greedy_actions,
    init_params,
    q_values,
)
from ..nn.optim import OptimizerState, sgd_momentum_step
from ..tabular.sr import q_from_sr, sr_closed_form
from .replay import ReplayBuffer, record_transition, sample_minibatch
from .snapshot import AgentSnapshot
from .training import LoopState, TrainingResult, make_snapshot, run_episodes, spawn_streams

logger = get_logger()

PhaseHook = Callable[[str, ModelParams], None]


def observation_shape(grid_map: GridMap) -> tuple[int, int, int]:
    return (N_CHANNELS, grid_map.height, grid_map.width)


def input_stats(
    grid_map: GridMap, network: NetworkConfig
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """network.normalize_input 打开时返回地图上的观测标准化统计量"""
    return observation_stats(grid_map) if network.normalize_input else None


# =============================================================================
# 单步操作
# =============================================================================


def select_action(
    params: ModelParams, obs: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    """ε-greedy 选动作

    每次调用都先抽一个均匀数决定是否探索，随机流的消耗与 ε 无关。

    Raises:
        RangeError: epsilon 不在 [0, 1]
    """
    if not 0.0 <= epsilon <= 1.0:
        raise RangeError("epsilon", f"需要在 [0, 1] 内，实际为 {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(params.n_actions))
    return int(greedy_actions(params, obs)[0])


def sync_target(params: ModelParams) -> ModelParams:
    """alpha_prev ← alpha (深拷贝)"""
    params["alpha_prev.W"] = params["alpha.W"].copy()
    params["alpha_prev.b"] = params["alpha.b"].copy()
    return params


@dataclass(frozen=True)
class StepReport:
    loss_r: float
    loss_a: float
    loss_m: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.loss_r, self.loss_a, self.loss_m)


def train_step(
    params: ModelParams,
    opt: OptimizerState,
    buffer: ReplayBuffer,
    train: TrainConfig,
    network: NetworkConfig,
    rng: np.random.Generator,
    reward_batch_size: Optional[int] = None,
    phase_hook: Optional[PhaseHook] = None,
) -> tuple[ModelParams, OptimizerState, StepReport]:
    """一次完整的两阶段更新，顺序固定为先奖励阶段后 SR 阶段

    奖励阶段在按奖励优先抽取的批次上更新 (θ, w, θ̃)；SR 阶段在均匀批次上只更新 α。

    Args:
        reward_batch_size: 奖励阶段的样本数，缺省为 batch_size
        phase_hook: 每个阶段结束后以 ("reward" | "sr", params) 调用

    Raises:
        InsufficientDataError: 主缓冲区的转移数少于 batch_size
    """
    if len(buffer) < train.batch_size:
        raise InsufficientDataError(
            f"缓冲区只有 {len(buffer)} 条转移，少于批次大小 {train.batch_size}"
        )

    n_reward = reward_batch_size or train.batch_size
    batch = sample_minibatch(buffer, n_reward, "reward_prioritized", rng, train.reward_db_prob)
    reward_grad = grad_reward_phase(
        params, batch.next_obs, batch.rewards, network.reward_weight, network.recon_weight
    )
    sgd_momentum_step(params, reward_grad.grads, opt)
    if phase_hook:
        phase_hook("reward", params)

    batch = sample_minibatch(buffer, train.batch_size, "uniform", rng)
    sr_grad = grad_sr_phase(
        params,
        batch.obs,
        batch.actions,
        batch.next_obs,
        batch.terminal,
        train.gamma,
        network.terminal_bootstrap,
        train.successor_target,
    )
    sgd_momentum_step(params, sr_grad.grads, opt)
    if phase_hook:
        phase_hook("sr", params)

    report = StepReport(
        loss_r=reward_grad.parts["loss_r"],
        loss_a=reward_grad.parts["loss_a"],
        loss_m=sr_grad.parts["loss_m"],
    )
    return params, opt, report


# =============================================================================
# 训练
# =============================================================================


class DSRLearner:
    """训练循环中的 DSR 学习器"""

    kind = "dsr"

    def __init__(self, params: ModelParams, opt: OptimizerState, config: ExperimentConfig):
        self.params = params
        self.opt = opt
        self.train = config.train
        self.network = config.network

    def act(self, obs: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
        return select_action(self.params, obs, epsilon, rng)

    def update(
        self, buffer: ReplayBuffer, rng: np.random.Generator, reward_batch_size: int
    ) -> Optional[tuple[float, float, float]]:
        if len(buffer) < self.train.batch_size:
            return None
        self.params, self.opt, report = train_step(
            self.params, self.opt, buffer, self.train, self.network, rng, reward_batch_size
        )
        return report.as_tuple()

    def after_step(self, global_step: int) -> None:
        if global_step % self.train.target_sync_interval == 0:
            sync_target(self.params)


def run_training(
    grid_map: GridMap,
    config: ExperimentConfig,
    seed: Optional[int] = None,
    resume: Optional[AgentSnapshot] = None,
    max_env_steps: Optional[int] = None,
    include_replay: bool = True,
    episode_callback: Optional[Callable[[TrainingRow], None]] = None,
) -> TrainingResult:
    """按 ε-greedy 交互、回放、两阶段更新与目标同步训练 DSR

    Args:
        grid_map: 训练地图
        config: 实验配置
        seed: 随机种子，缺省为 config.seed
        resume: 从该快照的回合边界继续
        max_env_steps: 环境步数预算，缺省为 config.train.max_env_steps，0 表示不限

    Returns:
        TrainingResult: 结束时的快照与逐回合指标

    Raises:
        TopologyChangedError: 续跑时地图布局与快照不一致
        SnapshotError: 快照不是 DSR 类型
    """
    obs_shape = observation_shape(grid_map)
    if resume is not None:
        if resume.kind != DSRLearner.kind:
            raise SnapshotError(f"快照类型为 {resume.kind}，无法续跑 DSR 训练")
        seed = resume.seed
        state = LoopState.from_snapshot(resume, grid_map, obs_shape)
        params, opt = resume.params.copy(), resume.opt.copy()
        logger.info(f"从第 {state.episode} 回合 (第 {state.global_step} 步) 继续训练")
    else:
        seed = config.seed if seed is None else seed
        state = LoopState.fresh(grid_map, config, seed, obs_shape)
        spec = NetworkSpec.from_config(obs_shape, config.network)
        stats = input_stats(grid_map, config.network)
        params = init_params(spec, state.streams["init"], stats)
        opt = OptimizerState.create(params, config.train.lr, config.train.momentum)

    budget = config.train.max_env_steps if max_env_steps is None else max_env_steps
    learner = DSRLearner(params, opt, config)
    state = run_episodes(learner, grid_map, config, state, budget, episode_callback)
    logger.info(f"DSR 训练结束: {state.episode} 回合，{state.global_step} 步，{state.updates} 次更新")
    snapshot = make_snapshot(learner, state, grid_map, config, seed, include_replay)
    return TrainingResult(snapshot=snapshot, rows=list(state.rows))


def random_policy_config(config: ExperimentConfig) -> ExperimentConfig:
    """随机策略 SR 的训练配置副本

    ε 恒为 1，奖励损失权重为 0，折扣取 subgoals.gamma，回合数取 subgoals.train_episodes，
    后继目标对下一步的动作取平均。
    """
    train = dataclasses.replace(
        config.train,
        gamma=config.subgoals.gamma,
        epsilon_start=1.0,
        epsilon_end=1.0,
        epsilon_anneal_steps=0,
        total_episodes=config.subgoals.train_episodes,
        successor_target="uniform",
    )
    network = dataclasses.replace(config.network, reward_weight=0.0)
    return dataclasses.replace(config, train=train, network=network)


def train_random_policy_sr(
    grid_map: GridMap, config: ExperimentConfig, seed: Optional[int] = None
) -> TrainingResult:
    """随机策略下只学习后继分支与重建分支，供子目标提取使用

    训练时目标格不终止回合，SR 只反映地图拓扑，与表格来源的约定一致。
    """
    return run_training(
        grid_map.without_goal_exit(), random_policy_config(config), seed=seed, include_replay=False
    )


# =============================================================================
# 远端奖励变化
# =============================================================================


def greedy_policy_matrix(params: ModelParams, grid_map: GridMap, model) -> np.ndarray:
    """冻结参数下每个状态的贪心动作，编码为 one-hot 策略矩阵"""
    obs = np.stack([encode_observation(grid_map, cell) for cell in model.states])
    actions = greedy_actions(params, obs)
    policy = np.zeros((model.n_states, model.n_actions))
    policy[np.arange(model.n_states), actions] = 1.0
    return policy


@dataclass
class DistalResult:
    rows: list[DistalRow]
    steps_to_tolerance: Optional[int]
    oracle: float
    params: Any

    @property
    def final_error(self) -> float:
        return self.rows[-1].rel_error if self.rows else float("nan")


def steps_to_tolerance(rows: list[DistalRow], tolerance: float) -> Optional[int]:
    """相对误差进入容差并此后一直保持时的环境步数；从未满足时返回 None"""
    hit: Optional[int] = None
    for row in rows:
        if row.rel_error <= tolerance:
            if hit is None:
                hit = row.steps
        else:
            hit = None
    return hit


def relative_error(value: float, oracle: float) -> float:
    return abs(value - oracle) / max(abs(oracle), 1e-12)


def distal_reward_adapt(
    snapshot: AgentSnapshot,
    new_map: GridMap,
    config: ExperimentConfig,
    seed: Optional[int] = None,
) -> DistalResult:
    """冻结 θ、α、θ̃，只用 L^r 重新训练 w

    冻结的贪心策略 (带评估 ε) 在新地图上收集转移；每一步在按奖励优先的批次上
    更新一次 w，并记录出生格最优动作的 Q 与表格参照值的差距。参照值为冻结贪心
    策略下闭式 SR 与新奖励的内积。

    Raises:
        TopologyChangedError: 新地图的布局与快照不同
    """
    if not snapshot.grid_map().same_topology(new_map):
        raise TopologyChangedError("远端奖励实验只允许修改奖励，地图布局必须一致")
    distal, train = config.distal, config.train
    seed = config.seed if seed is None else seed
    streams = spawn_streams(seed)

    params = snapshot.params.copy()
    frozen = params.copy()
    opt = OptimizerState(
        learning_rate=distal.lr,
        momentum=distal.momentum,
        velocity={"w": np.zeros_like(params["w"])},
    )

    model = build_transition_model(new_map)
    policy = greedy_policy_matrix(frozen, new_map, model)
    Q_oracle = q_from_sr(sr_closed_form(model.T, policy, train.gamma, model.terminal), model.R)
    start_cell = new_map.start_cells[0]
    start = model.index[start_cell]
    a_star = int(np.argmax(policy[start]))
    oracle = float(Q_oracle[start, a_star])
    phi_start = forward_features(params, encode_observation(new_map, start_cell))

    buffer = ReplayBuffer(train.replay_capacity, observation_shape(new_map), new_map.step_penalty)
    env = GridEnv(new_map, streams["env"])
    rows: list[DistalRow] = []
    steps, updates = 0, 0
    obs = env.reset()
    while steps < distal.max_env_steps:
        if env.done:
            obs = env.reset()
        action = select_action(frozen, obs, config.eval.epsilon, streams["act"])
        t = env.step(action)
        record_transition(buffer, t)
        obs = t.next_obs
        steps += 1
        if len(buffer) < distal.batch_size:
            continue

        batch = sample_minibatch(
            buffer, distal.batch_size, "reward_prioritized", streams["train"], train.reward_db_prob
        )
        grad = grad_reward_phase(params, batch.next_obs, batch.rewards, 1.0, 0.0)
        sgd_momentum_step(params, {"w": grad.grads["w"]}, opt)
        updates += 1
        q_start = float(q_values(params, phi_start)[a_star])
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
    logger.info(f"w 适应结束: {updates} 次更新，参照 Q = {oracle:.4f}，达到容差的步数 {reached}")
    return DistalResult(rows=rows, steps_to_tolerance=reached, oracle=oracle, params=params)
