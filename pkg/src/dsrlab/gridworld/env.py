# -*- coding: utf-8 -*-
"""
网格世界环境
状态转移规则、one-hot 观测编码与精确转移模型
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core.const import N_ACTIONS
from ..core.exceptions import BadActionError, ShapeMismatchError, StepOnTerminalError
from .maps import Cell, GridMap, Tile, neighbor

# 观测通道: 四种格子 + 智能体位置
N_CHANNELS = len(Tile) + 1
AGENT_CHANNEL = len(Tile)


@dataclass(frozen=True)
class EnvState:
    agent_cell: Cell
    steps_taken: int = 0
    terminal: bool = False


@dataclass(frozen=True)
class Transition:
    """一次交互 (s, a, R(s'), s')

    terminal 表示进入目标格；truncated 表示达到步数上限，二者互斥。
    """

    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    terminal: bool
    truncated: bool = False


def _as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def reset(grid_map: GridMap, seed: int | np.random.Generator) -> tuple[EnvState, np.ndarray]:
    """在出生格中均匀随机放置智能体

    Args:
        grid_map: 地图
        seed: 整数种子或已有的 Generator (后者会被推进)

    Returns:
        (初始状态, 观测)
    """
    rng = _as_rng(seed)
    starts = grid_map.start_cells
    cell = starts[int(rng.integers(len(starts)))] if len(starts) > 1 else starts[0]
    state = EnvState(agent_cell=cell)
    return state, encode_observation(grid_map, state)


def step(state: EnvState, grid_map: GridMap, action: int) -> tuple[EnvState, float, bool]:
    """执行一步

    奖励由移动后所在格决定: 目标格给 goal_reward 并终止，水格给 water_penalty，
    其余给 step_penalty。撞墙时留在原地。达到 step_limit 时强制终止，奖励照常。
    地图的 goal_terminal 为 False 时目标格不终止。

    Raises:
        StepOnTerminalError: 状态已终止
        BadActionError: 动作编号无效
    """
    if state.terminal:
        raise StepOnTerminalError(f"状态已终止: {state}")
    if not 0 <= int(action) < N_ACTIONS:
        raise BadActionError(f"无效的动作: {action}")

    cell = neighbor(grid_map, state.agent_cell, int(action))
    reward = grid_map.reward_for(cell)
    steps = state.steps_taken + 1
    terminal = grid_map.ends_episode(cell) or steps >= grid_map.step_limit
    next_state = EnvState(agent_cell=cell, steps_taken=steps, terminal=bool(terminal))
    return next_state, reward, bool(terminal)


def encode_observation(grid_map: GridMap, state: EnvState | Cell) -> np.ndarray:
    """编码为 (5, H, W) 的 one-hot 张量

    通道 0-3 对应 Tile 取值，通道 4 是智能体位置。
    """
    cell = state.agent_cell if isinstance(state, EnvState) else state
    obs = np.zeros((N_CHANNELS, grid_map.height, grid_map.width), dtype=np.float64)
    rows, cols = np.indices(grid_map.shape)
    obs[grid_map.tiles.astype(np.intp), rows, cols] = 1.0
    obs[AGENT_CHANNEL, cell[0], cell[1]] = 1.0
    return obs


def observation_stats(grid_map: GridMap) -> tuple[np.ndarray, np.ndarray]:
    """智能体均匀分布在所有非墙格时，展平观测逐分量的均值与 1/标准差

    不随位置变化的分量 (墙、水、目标通道) 标准差为 0，其缩放记为 1，
    减去均值后恒为 0。
    """
    obs = np.stack(
        [encode_observation(grid_map, cell).reshape(-1) for cell in grid_map.passable_cells()]
    )
    mean = obs.mean(axis=0)
    std = obs.std(axis=0)
    scale = np.ones_like(std)
    varying = std > 0.0
    scale[varying] = 1.0 / std[varying]
    return mean, scale


def decode_observation(obs: np.ndarray) -> tuple[np.ndarray, Cell]:
    """encode_observation 的逆运算，返回 (tiles, agent_cell)"""
    if obs.ndim != 3 or obs.shape[0] != N_CHANNELS:
        raise ShapeMismatchError(f"观测形状应为 ({N_CHANNELS}, H, W)，实际为 {obs.shape}")
    tiles = np.argmax(obs[:AGENT_CHANNEL], axis=0).astype(np.int8)
    r, c = np.unravel_index(int(np.argmax(obs[AGENT_CHANNEL])), obs.shape[1:])
    return tiles, (int(r), int(c))


# =============================================================================
# 精确转移模型
# =============================================================================


@dataclass
class TransitionModel:
    """表格形式的 MDP

    T[s, a, s'] 为确定性 one-hot；R[s] 为进入 s 时的奖励；目标格吸收且自环不再计奖励。
    """

    states: list[Cell]
    index: dict[Cell, int]
    T: np.ndarray
    R: np.ndarray
    terminal: np.ndarray
    next_state: np.ndarray
    start_states: list[int] = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return int(self.T.shape[1])


def build_transition_model(grid_map: GridMap, absorbing_goals: bool = True) -> TransitionModel:
    """枚举所有非墙格构建转移张量

    Args:
        grid_map: 地图
        absorbing_goals: False 时目标格像普通格一样可以离开，用于只关心拓扑的场合

    Returns:
        TransitionModel
    """
    states = grid_map.passable_cells()
    index = {cell: i for i, cell in enumerate(states)}
    n = len(states)

    next_state = np.empty((n, N_ACTIONS), dtype=np.intp)
    terminal = np.zeros(n, dtype=bool)
    R = np.empty(n, dtype=np.float64)
    for i, cell in enumerate(states):
        R[i] = grid_map.reward_for(cell)
        is_goal = grid_map.tiles[cell] == Tile.GOAL
        terminal[i] = bool(is_goal and absorbing_goals)
        for a in range(N_ACTIONS):
            next_state[i, a] = i if terminal[i] else index[neighbor(grid_map, cell, a)]

    T = np.zeros((n, N_ACTIONS, n), dtype=np.float64)
    T[np.arange(n)[:, None], np.arange(N_ACTIONS)[None, :], next_state] = 1.0
    return TransitionModel(
        states=states,
        index=index,
        T=T,
        R=R,
        terminal=terminal,
        next_state=next_state,
        start_states=[index[c] for c in grid_map.start_cells],
    )


class GridEnv:
    """持有随机数发生器的有状态环境封装"""

    def __init__(self, grid_map: GridMap, seed: int | np.random.Generator = 0):
        self.grid_map = grid_map
        self.rng = _as_rng(seed)
        self.state: Optional[EnvState] = None
        self._obs: Optional[np.ndarray] = None

    @property
    def cell(self) -> Cell:
        if self.state is None:
            raise StepOnTerminalError("环境尚未 reset")
        return self.state.agent_cell

    @property
    def observation(self) -> np.ndarray:
        if self._obs is None:
            raise StepOnTerminalError("环境尚未 reset")
        return self._obs

    @property
    def done(self) -> bool:
        return self.state is None or self.state.terminal

    def reset(self) -> np.ndarray:
        self.state, self._obs = reset(self.grid_map, self.rng)
        return self._obs

    def step(self, action: int) -> Transition:
        if self.state is None:
            raise StepOnTerminalError("环境尚未 reset")
        prev_obs = self._obs
        self.state, reward, done = step(self.state, self.grid_map, action)
        self._obs = encode_observation(self.grid_map, self.state)
        reached_goal = self.grid_map.ends_episode(self.state.agent_cell)
        return Transition(
            obs=prev_obs,
            action=int(action),
            reward=reward,
            next_obs=self._obs,
            terminal=bool(reached_goal),
            truncated=bool(done and not reached_goal),
        )
