# -*- coding: utf-8 -*-
"""
有限差分梯度检查
在每个参数组随机抽取坐标，用中心差分核对解析梯度
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..core.exceptions import RangeError
from ..core.logger import get_logger
from .model import ModelParams, grad_reward_phase, grad_sr_phase
from .qnet import QNetParams, grad_q_phase

logger = get_logger()

# 小于该值的梯度按绝对误差比较
REL_ERROR_FLOOR = 1e-4


@dataclass
class GroupCheck:
    """单个参数组的检查结果"""

    group: str
    max_rel_error: float = 0.0
    n_checked: int = 0
    n_skipped: int = 0
    tolerance: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.n_checked > 0 and self.max_rel_error <= self.tolerance


@dataclass
class GradCheckReport:
    groups: dict[str, GroupCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.groups) and all(g.passed for g in self.groups.values())

    @property
    def max_rel_error(self) -> float:
        return max((g.max_rel_error for g in self.groups.values()), default=0.0)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), REL_ERROR_FLOOR)


def finite_diff_check(
    tensors: dict[str, np.ndarray],
    loss_fn: Callable[[], float],
    grads: dict[str, np.ndarray],
    groups: Optional[list[str]] = None,
    epsilon: float = 1e-5,
    tolerance: float = 1e-4,
    n_coords: int = 100,
    seed: int | np.random.Generator = 0,
    kink_fn: Optional[Callable[[], bytes]] = None,
) -> GradCheckReport:
    """中心差分检查

    Args:
        tensors: 参数字典，检查时原地扰动后恢复
        loss_fn: 无参损失函数，读取 tensors 的当前值
        grads: 解析梯度；缺失的张量视为梯度为 0
        groups: 要检查的参数组 (名字第一段)，默认全部
        epsilon: 差分步长
        tolerance: 相对误差上限
        n_coords: 每组抽查的坐标数，不足时检查全部
        seed: 抽样种子
        kink_fn: 返回不可导点签名；±ε 两侧签名不同的坐标跳过

    Returns:
        GradCheckReport
    """
    if epsilon <= 0.0:
        raise RangeError("epsilon", "必须为正")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if groups is None:
        groups = sorted({name.split(".")[0] for name in tensors})

    base_signature = kink_fn() if kink_fn else None
    report = GradCheckReport()
    for group in groups:
        names = sorted(k for k in tensors if k.split(".")[0] == group)
        coords = [(name, i) for name in names for i in range(tensors[name].size)]
        check = GroupCheck(group=group, tolerance=tolerance)
        if len(coords) > n_coords:
            picks = rng.choice(len(coords), size=n_coords, replace=False)
            coords = [coords[k] for k in sorted(picks)]

        for name, i in coords:
            flat = tensors[name].reshape(-1)
            original = flat[i]
            flat[i] = original + epsilon
            loss_plus = loss_fn()
            sig_plus = kink_fn() if kink_fn else None
            flat[i] = original - epsilon
            loss_minus = loss_fn()
            sig_minus = kink_fn() if kink_fn else None
            flat[i] = original

            if kink_fn and not (sig_plus == sig_minus == base_signature):
                check.n_skipped += 1
                continue
            numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
            analytic = float(grads[name].reshape(-1)[i]) if name in grads else 0.0
            check.max_rel_error = max(check.max_rel_error, relative_error(analytic, numeric))
            check.n_checked += 1

        report.groups[group] = check
        logger.debug(
            f"梯度检查 {group}: 最大相对误差 {check.max_rel_error:.2e}，"
            f"检查 {check.n_checked}，跳过 {check.n_skipped}"
        )
    return report


# =============================================================================
# DSR / Q 网络的检查入口
# =============================================================================


def check_reward_phase(
    params: ModelParams,
    obs: np.ndarray,
    rewards: np.ndarray,
    reward_weight: float = 1.0,
    recon_weight: float = 1.0,
    **kwargs,
) -> GradCheckReport:
    """奖励阶段: θ、w、θ̃ 与解析梯度一致，α 梯度为 0"""

    def evaluate():
        return grad_reward_phase(params, obs, rewards, reward_weight, recon_weight)

    result = evaluate()
    return finite_diff_check(
        params.tensors,
        lambda: evaluate().loss,
        result.grads,
        groups=["theta", "w", "theta_tilde", "alpha"],
        kink_fn=lambda: evaluate().signature,
        **kwargs,
    )


def check_sr_phase(
    params: ModelParams,
    obs: np.ndarray,
    actions: np.ndarray,
    next_obs: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
    terminal_bootstrap: str = "absorbing",
    next_action: str = "greedy",
    **kwargs,
) -> GradCheckReport:
    """SR 阶段: α 与解析梯度一致"""

    def evaluate():
        return grad_sr_phase(
            params, obs, actions, next_obs, terminal, gamma, terminal_bootstrap, next_action
        )

    result = evaluate()
    return finite_diff_check(
        params.tensors,
        lambda: evaluate().loss,
        result.grads,
        groups=["alpha"],
        kink_fn=lambda: evaluate().signature,
        **kwargs,
    )


def check_q_phase(
    params: QNetParams,
    obs: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    next_obs: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
    **kwargs,
) -> GradCheckReport:
    def evaluate():
        return grad_q_phase(params, obs, actions, rewards, next_obs, terminal, gamma)

    result = evaluate()
    return finite_diff_check(
        params.tensors,
        lambda: evaluate().loss,
        result.grads,
        groups=["theta", "q"],
        kink_fn=lambda: evaluate().signature,
        **kwargs,
    )
