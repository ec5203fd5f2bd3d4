# -*- coding: utf-8 -*-
"""
退火日程
ε 线性退火与奖励分支样本数的指数退火
"""

from dataclasses import dataclass

from ..core.const import (
    DEFAULT_EPSILON_ANNEAL_STEPS,
    DEFAULT_EPSILON_END,
    DEFAULT_EPSILON_START,
)
from ..core.exceptions import RangeError


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = DEFAULT_EPSILON_START
    end: float = DEFAULT_EPSILON_END
    anneal_steps: int = DEFAULT_EPSILON_ANNEAL_STEPS

    def __post_init__(self):
        if not (0.0 <= self.end <= self.start <= 1.0):
            raise RangeError("epsilon", f"需要 0 <= end <= start <= 1，实际为 {self.start} -> {self.end}")
        if self.anneal_steps < 0:
            raise RangeError("epsilon_anneal_steps", "不能为负")

    @classmethod
    def from_config(cls, train) -> "EpsilonSchedule":
        return cls(train.epsilon_start, train.epsilon_end, train.epsilon_anneal_steps)


def epsilon_at(schedule: EpsilonSchedule, global_step: int) -> float:
    """从 start 线性插值到 end，anneal_steps 之后保持 end"""
    if global_step < 0:
        raise RangeError("global_step", "不能为负")
    if schedule.anneal_steps == 0:
        return schedule.end
    frac = min(global_step / schedule.anneal_steps, 1.0)
    return schedule.start + frac * (schedule.end - schedule.start)


def reward_sample_count(train, episode: int) -> int:
    """第 episode 个回合 (从 0 计) 奖励阶段的样本数: max(floor, ⌊init·decay^episode⌋)"""
    count = int(train.reward_samples_init * train.reward_samples_decay**episode)
    return max(train.reward_samples_floor, count)
