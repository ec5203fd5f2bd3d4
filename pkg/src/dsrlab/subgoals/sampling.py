# -*- coding: utf-8 -*-
"""
SR 样本采集
在随机策略下游走，记录访问到的状态、所取动作与对应的后继表示向量
"""

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..core.const import ACTION_MODES, N_ACTIONS
from ..core.exceptions import DimensionMismatchError, RangeError
from ..gridworld.env import GridEnv, TransitionModel, build_transition_model, encode_observation
from ..gridworld.maps import Cell, GridMap
from ..nn.model import ModelParams, forward_features, forward_successor, forward_successor_all
from ..tabular.planning import uniform_policy
from ..tabular.sr import sr_closed_form


def state_id(grid_map: GridMap, cell: Cell) -> int:
    """格子在整张地图上的行优先编号"""
    return int(cell[0]) * grid_map.width + int(cell[1])


def cell_of(grid_map: GridMap, sid: int) -> Cell:
    return divmod(int(sid), grid_map.width)


# =============================================================================
# SR 来源
# =============================================================================


class SRSource(Protocol):
    """按 (格子, 动作) 给出后继表示向量"""

    @property
    def dimension(self) -> int: ...

    def vectors(self, cells: list[Cell], actions: np.ndarray) -> np.ndarray: ...

    def averaged(self, cells: list[Cell]) -> np.ndarray: ...


class LearnedSR:
    """网络的后继分支: m = u_α(f_θ(s), a)"""

    def __init__(self, params: ModelParams, grid_map: GridMap):
        self.params = params
        self.grid_map = grid_map

    @property
    def dimension(self) -> int:
        return self.params.feature_dim

    def _features(self, cells: list[Cell]) -> np.ndarray:
        obs = np.stack([encode_observation(self.grid_map, cell) for cell in cells])
        return np.atleast_2d(forward_features(self.params, obs))

    def vectors(self, cells: list[Cell], actions: np.ndarray) -> np.ndarray:
        actions = np.asarray(actions, dtype=np.intp)
        return forward_successor(self.params, self._features(cells), actions)

    def averaged(self, cells: list[Cell]) -> np.ndarray:
        return forward_successor_all(self.params, self._features(cells)).mean(axis=1)


class TabularSR:
    """闭式 SR 的行 M(s, a, ·)"""

    def __init__(self, model: TransitionModel, M: np.ndarray):
        if M.shape != (model.n_states, model.n_actions, model.n_states):
            raise DimensionMismatchError(f"SR 张量形状 {M.shape} 与转移模型不一致")
        self.model = model
        self.M = M

    @classmethod
    def from_map(cls, grid_map: GridMap, gamma: float) -> "TabularSR":
        """均匀随机策略下的 SR；目标格不吸收，只保留地图拓扑"""
        model = build_transition_model(grid_map, absorbing_goals=False)
        policy = uniform_policy(model.n_states, model.n_actions)
        return cls(model, sr_closed_form(model.T, policy, gamma, model.terminal))

    @property
    def dimension(self) -> int:
        return self.model.n_states

    def _rows(self, cells: list[Cell]) -> np.ndarray:
        return np.array([self.model.index[cell] for cell in cells], dtype=np.intp)

    def vectors(self, cells: list[Cell], actions: np.ndarray) -> np.ndarray:
        return self.M[self._rows(cells), np.asarray(actions, dtype=np.intp)]

    def averaged(self, cells: list[Cell]) -> np.ndarray:
        return self.M[self._rows(cells)].mean(axis=1)


# =============================================================================
# 样本集
# =============================================================================


@dataclass
class SRSampleSet:
    """样本 (状态编号, 动作, m 向量) 的集合"""

    state_ids: np.ndarray
    actions: np.ndarray
    vectors: np.ndarray
    policy: str = "random"
    cells: list[Cell] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.state_ids)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != n or len(self.actions) != n:
            raise DimensionMismatchError("样本集各字段长度不一致")

    def __len__(self) -> int:
        return int(len(self.state_ids))

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def dedupe(self) -> "SRSampleSet":
        """按状态编号合并，同一状态的多个向量取平均，结果按编号升序"""
        ids, inverse = np.unique(self.state_ids, return_inverse=True)
        sums = np.zeros((len(ids), self.dimension))
        np.add.at(sums, inverse, self.vectors)
        counts = np.bincount(inverse, minlength=len(ids))
        first = {}
        for i, sid in enumerate(self.state_ids):
            first.setdefault(int(sid), i)
        return SRSampleSet(
            state_ids=ids,
            actions=np.array([self.actions[first[int(s)]] for s in ids], dtype=np.intp),
            vectors=sums / counts[:, None],
            policy=self.policy,
            cells=[self.cells[first[int(s)]] for s in ids] if self.cells else [],
        )


def collect_sr_samples(
    grid_map: GridMap,
    source: SRSource,
    n: int,
    seed: int | np.random.Generator,
    action_mode: str = "taken",
    dedupe: bool = True,
) -> SRSampleSet:
    """ε=1 的随机游走中记录 n 次访问

    Args:
        grid_map: 地图
        source: m 向量的来源
        n: 访问次数
        seed: 种子或 Generator
        action_mode: ``taken`` 取实际动作的向量，``averaged`` 取各动作平均
        dedupe: 是否按状态合并

    Returns:
        SRSampleSet
    """
    if n < 0:
        raise RangeError("subgoals.n_samples", "不能为负")
    if action_mode not in ACTION_MODES:
        raise RangeError("subgoals.action_mode", f"可选值: {ACTION_MODES}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    env = GridEnv(grid_map, rng)
    cells: list[Cell] = []
    actions = np.empty(n, dtype=np.intp)
    for i in range(n):
        if env.done:
            env.reset()
        cells.append(env.cell)
        actions[i] = rng.integers(N_ACTIONS)
        env.step(int(actions[i]))

    if n == 0:
        vectors = np.empty((0, source.dimension))
    elif action_mode == "taken":
        vectors = source.vectors(cells, actions)
    else:
        vectors = source.averaged(cells)

    samples = SRSampleSet(
        state_ids=np.array([state_id(grid_map, c) for c in cells], dtype=np.intp),
        actions=actions,
        vectors=np.asarray(vectors, dtype=np.float64).reshape(n, source.dimension),
        cells=cells,
    )
    return samples.dedupe() if dedupe and n else samples
