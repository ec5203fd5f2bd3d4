# -*- coding: utf-8 -*-
"""
经验回放
主缓冲区加一个只收显著奖励的 RewardDB，二者都是先进先出的环形存储
"""

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..core.const import DEFAULT_REWARD_DB_PROB
from ..core.exceptions import EmptyBufferError, RangeError
from ..gridworld.env import Transition

SAMPLE_MODES = ("uniform", "reward_prioritized")


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    terminal: np.ndarray
    truncated: np.ndarray
    from_reward_db: np.ndarray

    def __len__(self) -> int:
        return int(self.actions.shape[0])


class RingStore:
    """定长环形存储，观测以 uint8 保存，按需扩容直至 capacity"""

    def __init__(self, capacity: int, obs_shape: tuple[int, ...]):
        if capacity < 1:
            raise RangeError("replay_capacity", "至少为 1")
        self.capacity = capacity
        self.obs_shape = tuple(obs_shape)
        self.size = 0
        self.cursor = 0
        self._allocate(min(capacity, 1024))

    def _allocate(self, n: int) -> None:
        old = getattr(self, "obs", None)
        fields = {
            "obs": (np.uint8, self.obs_shape),
            "next_obs": (np.uint8, self.obs_shape),
            "actions": (np.int8, ()),
            "rewards": (np.float64, ()),
            "terminal": (np.bool_, ()),
            "truncated": (np.bool_, ()),
        }
        for name, (dtype, shape) in fields.items():
            arr = np.zeros((n, *shape), dtype=dtype)
            if old is not None:
                arr[: self.size] = getattr(self, name)[: self.size]
            setattr(self, name, arr)

    def __len__(self) -> int:
        return self.size

    def add(self, t: Transition) -> None:
        if self.cursor >= self.obs.shape[0]:
            self._allocate(min(self.capacity, 2 * self.obs.shape[0]))
        i = self.cursor
        self.obs[i] = t.obs
        self.next_obs[i] = t.next_obs
        self.actions[i] = t.action
        self.rewards[i] = t.reward
        self.terminal[i] = t.terminal
        self.truncated[i] = t.truncated
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def ordered_indices(self) -> np.ndarray:
        """从最旧到最新的下标"""
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.size) + self.cursor) % self.capacity

    def rewards_in_order(self) -> np.ndarray:
        return self.rewards[self.ordered_indices()]

    def state_dict(self) -> dict[str, Any]:
        n = self.size
        return {
            "capacity": self.capacity,
            "cursor": self.cursor,
            "size": n,
            "obs": self.obs[:n].copy(),
            "next_obs": self.next_obs[:n].copy(),
            "actions": self.actions[:n].copy(),
            "rewards": self.rewards[:n].copy(),
            "terminal": self.terminal[:n].copy(),
            "truncated": self.truncated[:n].copy(),
        }

    def load_state_dict(self, state: dict[str, Any]) -> None:
        self.capacity = int(state["capacity"])
        self.size = int(state["size"])
        self.cursor = int(state["cursor"])
        self._allocate_exact(max(self.size, min(self.capacity, 1024)))
        for name in ("obs", "next_obs", "actions", "rewards", "terminal", "truncated"):
            getattr(self, name)[: self.size] = state[name]

    def _allocate_exact(self, n: int) -> None:
        self.obs = None
        self._allocate(n)


class ReplayBuffer:
    """主缓冲区 + RewardDB

    RewardDB 收录奖励既不等于 step_penalty 也不为 0 的转移 (到达目标、踩水等)。
    len(buffer) 是主缓冲区的大小。
    """

    def __init__(self, capacity: int, obs_shape: tuple[int, ...], step_penalty: float):
        self.step_penalty = step_penalty
        self.main = RingStore(capacity, obs_shape)
        self.reward_db = RingStore(capacity, obs_shape)

    def __len__(self) -> int:
        return len(self.main)

    @property
    def capacity(self) -> int:
        return self.main.capacity

    def is_salient(self, reward: float) -> bool:
        return reward != self.step_penalty and reward != 0.0

    def state_dict(self) -> dict[str, Any]:
        return {
            "step_penalty": self.step_penalty,
            "main": self.main.state_dict(),
            "reward_db": self.reward_db.state_dict(),
        }

    @classmethod
    def from_state_dict(cls, state: dict[str, Any], obs_shape: tuple[int, ...]) -> "ReplayBuffer":
        buffer = cls(int(state["main"]["capacity"]), obs_shape, float(state["step_penalty"]))
        buffer.main.load_state_dict(state["main"])
        buffer.reward_db.load_state_dict(state["reward_db"])
        return buffer


def record_transition(buffer: ReplayBuffer, t: Transition) -> None:
    """写入主缓冲区；显著奖励同时写入 RewardDB"""
    buffer.main.add(t)
    if buffer.is_salient(t.reward):
        buffer.reward_db.add(t)


def _gather(store: RingStore, idx: np.ndarray) -> tuple[np.ndarray, ...]:
    return (
        store.obs[idx].astype(np.float64),
        store.actions[idx].astype(np.intp),
        store.rewards[idx],
        store.next_obs[idx].astype(np.float64),
        store.terminal[idx],
        store.truncated[idx],
    )


def sample_minibatch(
    buffer: ReplayBuffer,
    n: int,
    mode: str,
    rng: np.random.Generator,
    reward_db_prob: float = DEFAULT_REWARD_DB_PROB,
) -> Batch:
    """有放回地抽取小批量

    reward_prioritized 模式下每个样本以 reward_db_prob 的概率来自 RewardDB，
    否则来自主缓冲区；RewardDB 为空时退化为均匀抽样。

    Raises:
        EmptyBufferError: 主缓冲区为空
    """
    if mode not in SAMPLE_MODES:
        raise RangeError("mode", f"可选值: {SAMPLE_MODES}")
    if len(buffer) == 0:
        raise EmptyBufferError("回放缓冲区为空")

    from_db = np.zeros(n, dtype=bool)
    if mode == "reward_prioritized" and len(buffer.reward_db) > 0:
        from_db = rng.random(n) < reward_db_prob
    n_db = int(from_db.sum())
    main_idx = rng.integers(len(buffer.main), size=n - n_db)
    db_idx = rng.integers(len(buffer.reward_db), size=n_db) if n_db else np.empty(0, dtype=np.intp)

    shape = buffer.main.obs_shape
    obs = np.empty((n, *shape))
    next_obs = np.empty((n, *shape))
    actions = np.empty(n, dtype=np.intp)
    rewards = np.empty(n)
    terminal = np.empty(n, dtype=bool)
    truncated = np.empty(n, dtype=bool)
    for mask, store, idx in ((~from_db, buffer.main, main_idx), (from_db, buffer.reward_db, db_idx)):
        if idx.size:
            obs[mask], actions[mask], rewards[mask], next_obs[mask], terminal[mask], truncated[mask] = (
                _gather(store, idx)
            )
    return Batch(obs, actions, rewards, next_obs, terminal, truncated, from_db)
