# -*- coding: utf-8 -*-
"""
训练主循环
ε-greedy 交互、写入回放、每步更新、周期同步目标参数；DSR 与对照 Q 网络共用
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol

import numpy as np

from ..core.config import ExperimentConfig
from ..core.exceptions import TopologyChangedError
from ..core.logger import get_logger
from ..gridworld.env import GridEnv
from ..gridworld.maps import GridMap
from ..harness.metrics import TrainingRow
from ..nn.model import ModelParams
from ..nn.optim import OptimizerState
from .replay import ReplayBuffer, record_transition
from .schedule import EpsilonSchedule, epsilon_at, reward_sample_count
from .snapshot import AgentSnapshot

logger = get_logger()

STREAMS = ("init", "env", "act", "train")


def spawn_streams(seed: int) -> dict[str, np.random.Generator]:
    """由一个种子派生互相独立的随机流"""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(child)) for name, child in zip(STREAMS, children)}


def stream_states(streams: dict[str, np.random.Generator]) -> dict[str, Any]:
    return {name: rng.bit_generator.state for name, rng in streams.items()}


def restore_streams(states: dict[str, Any]) -> dict[str, np.random.Generator]:
    streams = {}
    for name, state in states.items():
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = state
        streams[name] = rng
    return streams


def map_params(grid_map: GridMap) -> dict[str, Any]:
    return {
        "step_penalty": grid_map.step_penalty,
        "water_penalty": grid_map.water_penalty,
        "goal_reward": grid_map.goal_reward,
        "step_limit": grid_map.step_limit,
        "goal_terminal": grid_map.goal_terminal,
        "name": grid_map.name,
    }


class Learner(Protocol):
    """训练循环需要的学习器接口"""

    kind: str
    params: ModelParams
    opt: OptimizerState

    def act(self, obs: np.ndarray, epsilon: float, rng: np.random.Generator) -> int: ...

    def update(
        self, buffer: ReplayBuffer, rng: np.random.Generator, reward_batch_size: int
    ) -> Optional[tuple[float, float, float]]: ...

    def after_step(self, global_step: int) -> None: ...


@dataclass
class TrainingResult:
    snapshot: AgentSnapshot
    rows: list[TrainingRow] = field(default_factory=list)

    @property
    def params(self) -> ModelParams:
        return self.snapshot.params


@dataclass
class LoopState:
    """回合边界处的可恢复状态"""

    streams: dict[str, np.random.Generator]
    buffer: ReplayBuffer
    episode: int = 0
    global_step: int = 0
    updates: int = 0
    rows: list[TrainingRow] = field(default_factory=list)

    @classmethod
    def fresh(cls, grid_map: GridMap, config: ExperimentConfig, seed: int, obs_shape) -> "LoopState":
        return cls(
            streams=spawn_streams(seed),
            buffer=ReplayBuffer(config.train.replay_capacity, obs_shape, grid_map.step_penalty),
        )

    @classmethod
    def from_snapshot(cls, snapshot: AgentSnapshot, grid_map: GridMap, obs_shape) -> "LoopState":
        if not snapshot.grid_map().same_topology(grid_map):
            raise TopologyChangedError("续跑的地图布局与快照不一致")
        if snapshot.replay is None:
            buffer = ReplayBuffer(1, obs_shape, grid_map.step_penalty)
        else:
            buffer = ReplayBuffer.from_state_dict(snapshot.replay, obs_shape)
        return cls(
            streams=restore_streams(snapshot.rng_states),
            buffer=buffer,
            episode=snapshot.episode,
            global_step=snapshot.global_step,
            updates=snapshot.updates,
            rows=[TrainingRow(**row) for row in snapshot.metrics],
        )


def make_snapshot(
    learner: Learner,
    state: LoopState,
    grid_map: GridMap,
    config: ExperimentConfig,
    seed: int,
    include_replay: bool = True,
) -> AgentSnapshot:
    return AgentSnapshot(
        kind=learner.kind,
        params=learner.params.copy(),
        opt=learner.opt.copy(),
        episode=state.episode,
        global_step=state.global_step,
        updates=state.updates,
        seed=seed,
        rng_states=stream_states(state.streams),
        replay=state.buffer.state_dict() if include_replay else None,
        map_text=grid_map.to_text(),
        map_params=map_params(grid_map),
        config=config.to_dict(),
        metrics=[dataclasses.asdict(row) for row in state.rows],
    )


def run_episodes(
    learner: Learner,
    grid_map: GridMap,
    config: ExperimentConfig,
    state: LoopState,
    max_env_steps: int = 0,
    episode_callback: Optional[Callable[[TrainingRow], None]] = None,
) -> LoopState:
    """按回合运行交互与更新，直到回合数或环境步数预算用尽

    预算只在回合边界检查，最后一个回合总是完整跑完。
    """
    train = config.train
    schedule = EpsilonSchedule.from_config(train)
    env = GridEnv(grid_map, state.streams["env"])
    act_rng, train_rng = state.streams["act"], state.streams["train"]

    while state.episode < train.total_episodes:
        if max_env_steps and state.global_step >= max_env_steps:
            break

        obs = env.reset()
        n_reward = reward_sample_count(train, state.episode)
        total_reward, eps = 0.0, schedule.start
        loss_sum = np.zeros(3)
        n_updates = 0

        while not env.done:
            clock = state.global_step if train.epsilon_mode == "step" else state.episode
            eps = epsilon_at(schedule, clock)
            action = learner.act(obs, eps, act_rng)
            t = env.step(action)
            record_transition(state.buffer, t)
            state.global_step += 1
            total_reward += t.reward

            losses = learner.update(state.buffer, train_rng, n_reward)
            if losses is not None:
                loss_sum += losses
                n_updates += 1
                state.updates += 1
            learner.after_step(state.global_step)
            obs = t.next_obs

        mean_losses = loss_sum / n_updates if n_updates else loss_sum
        row = TrainingRow(
            episode=state.episode,
            steps=state.global_step,
            reward=float(total_reward),
            eps=float(eps),
            loss_r=float(mean_losses[0]),
            loss_a=float(mean_losses[1]),
            loss_m=float(mean_losses[2]),
        )
        state.rows.append(row)
        state.episode += 1
        logger.debug(
            f"回合 {row.episode}: 步数 {row.steps}，回报 {row.reward:.2f}，ε {row.eps:.3f}，"
            f"L^r {row.loss_r:.4f}，L^a {row.loss_a:.4f}，L^m {row.loss_m:.4f}"
        )
        if episode_callback:
            episode_callback(row)

    return state
