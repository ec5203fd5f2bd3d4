# -*- coding: utf-8 -*-
"""
策略评估
以带小 ε 的贪心方式运行任意执行者，统计回合回报
"""

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..core.const import N_ACTIONS
from ..core.exceptions import RangeError
from ..gridworld.env import GridEnv, TransitionModel
from ..gridworld.maps import Cell, GridMap
from ..nn.model import ModelParams, greedy_actions
from ..nn.qnet import QNetParams, q_forward


class Actor(Protocol):
    """给出贪心动作的执行者；观测与智能体所在格同时提供"""

    def greedy(self, obs: np.ndarray, cell: Cell) -> int: ...


class DSRActor:
    def __init__(self, params: ModelParams):
        self.params = params

    def greedy(self, obs: np.ndarray, cell: Cell) -> int:
        return int(greedy_actions(self.params, obs)[0])


class QNetActor:
    def __init__(self, params: QNetParams):
        self.params = params

    def greedy(self, obs: np.ndarray, cell: Cell) -> int:
        return int(np.argmax(q_forward(self.params, obs)))


class TabularActor:
    """按表格 Q 取贪心动作，平局取编号最小者"""

    def __init__(self, model: TransitionModel, Q: np.ndarray):
        self.model = model
        self.Q = Q

    def greedy(self, obs: np.ndarray, cell: Cell) -> int:
        return int(np.argmax(self.Q[self.model.index[cell]]))


class RandomActor:
    def __init__(self, seed: int | np.random.Generator = 0):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def greedy(self, obs: np.ndarray, cell: Cell) -> int:
        return int(self.rng.integers(N_ACTIONS))


@dataclass
class EvalResult:
    mean: float
    std: float
    returns: list[float] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return len(self.returns)


def evaluate_policy(
    actor: Actor,
    grid_map: GridMap,
    episodes: int,
    seed: int,
    epsilon: float = 0.05,
) -> EvalResult:
    """运行 episodes 个回合并统计不折扣回报

    Args:
        actor: 执行者
        grid_map: 地图
        episodes: 回合数，至少为 1
        seed: 种子，决定出生格与探索
        epsilon: 评估时的探索概率

    Returns:
        EvalResult: 均值、总体标准差与各回合回报

    Raises:
        RangeError: episodes < 1 或 epsilon 越界
    """
    if episodes < 1:
        raise RangeError("eval.episodes", "至少为 1")
    if not 0.0 <= epsilon <= 1.0:
        raise RangeError("eval.epsilon", f"需要在 [0, 1] 内，实际为 {epsilon}")

    env_seed, act_seed = np.random.SeedSequence(seed).spawn(2)
    env = GridEnv(grid_map, np.random.default_rng(env_seed))
    rng = np.random.default_rng(act_seed)
    returns = []
    for _ in range(episodes):
        obs = env.reset()
        total = 0.0
        while not env.done:
            if rng.random() < epsilon:
                action = int(rng.integers(N_ACTIONS))
            else:
                action = actor.greedy(obs, env.cell)
            t = env.step(action)
            total += t.reward
            obs = t.next_obs
        returns.append(total)

    arr = np.asarray(returns)
    return EvalResult(mean=float(arr.mean()), std=float(arr.std()), returns=returns)
