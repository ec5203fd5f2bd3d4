# -*- coding: utf-8 -*-
"""
带动量的 SGD
v ← μ·v − lr·g；p ← p + v
"""

from dataclasses import dataclass, field

import numpy as np

from ..core.const import DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM
from ..core.exceptions import ShapeMismatchError
from .model import ModelParams


@dataclass
class OptimizerState:
    """每个可训练张量一个速度缓冲"""

    learning_rate: float = DEFAULT_LEARNING_RATE
    momentum: float = DEFAULT_MOMENTUM
    velocity: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(
        cls,
        params: ModelParams,
        learning_rate: float = DEFAULT_LEARNING_RATE,
        momentum: float = DEFAULT_MOMENTUM,
    ) -> "OptimizerState":
        velocity = {name: np.zeros_like(params[name]) for name in params.trainable_names()}
        return cls(learning_rate=learning_rate, momentum=momentum, velocity=velocity)

    def copy(self) -> "OptimizerState":
        return OptimizerState(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            velocity={k: v.copy() for k, v in self.velocity.items()},
        )


def sgd_momentum_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    opt: OptimizerState,
) -> tuple[ModelParams, OptimizerState]:
    """原地执行一步经典动量更新

    只更新 grads 中出现的张量，其余张量及其速度保持不变。

    Raises:
        ShapeMismatchError: 梯度与参数形状不一致或张量不存在
    """
    for name, g in grads.items():
        if name not in opt.velocity or name not in params:
            raise ShapeMismatchError(f"未知的可训练张量: {name}")
        p = params[name]
        if g.shape != p.shape:
            raise ShapeMismatchError(f"{name}: 梯度形状 {g.shape} 与参数形状 {p.shape} 不一致")
        v = opt.velocity[name]
        v *= opt.momentum
        v -= opt.learning_rate * g
        p += v
    return params, opt
