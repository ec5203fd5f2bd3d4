# -*- coding: utf-8 -*-
"""
表格策略与规划
策略构造、策略评估 (线性方程组) 与价值迭代
"""

from typing import Optional

import numpy as np

from ..core.exceptions import (
    ConvergenceFailureError,
    DimensionMismatchError,
    RangeError,
    SingularSystemError,
)
from ..core.logger import get_logger

logger = get_logger()


def absorbing_states(T: np.ndarray) -> np.ndarray:
    """所有动作都自环的状态视为终止状态"""
    n = T.shape[0]
    idx = np.arange(n)
    return np.all(T[idx, :, idx] == 1.0, axis=1)


def _check_model(T: np.ndarray, gamma: float, policy: Optional[np.ndarray] = None):
    if T.ndim != 3 or T.shape[0] != T.shape[2]:
        raise DimensionMismatchError(f"转移张量形状应为 (n, A, n)，实际为 {T.shape}")
    if not 0.0 <= gamma < 1.0:
        raise RangeError("gamma", f"必须在 [0, 1) 内，实际为 {gamma}")
    if policy is not None and policy.shape != T.shape[:2]:
        raise DimensionMismatchError(f"策略形状应为 {T.shape[:2]}，实际为 {policy.shape}")


def uniform_policy(n_states: int, n_actions: int) -> np.ndarray:
    return np.full((n_states, n_actions), 1.0 / n_actions)


def greedy_policy(Q: np.ndarray) -> np.ndarray:
    """确定性贪心策略，平局取编号最小的动作"""
    policy = np.zeros_like(Q, dtype=np.float64)
    policy[np.arange(Q.shape[0]), np.argmax(Q, axis=1)] = 1.0
    return policy


def epsilon_greedy_policy(Q: np.ndarray, epsilon: float) -> np.ndarray:
    """均匀策略与贪心策略的混合"""
    n_states, n_actions = Q.shape
    return (1.0 - epsilon) * greedy_policy(Q) + epsilon * uniform_policy(n_states, n_actions)


def policy_evaluation(
    T: np.ndarray,
    R: np.ndarray,
    policy: np.ndarray,
    gamma: float,
    terminal: Optional[np.ndarray] = None,
) -> np.ndarray:
    """直接求解 |S||A| 维线性方程组得到 Q^π

    采用状态奖励约定: Q(s,a) = R(s) + γ Σ_s' T(s'|s,a) Σ_a' π(a'|s') Q(s',a')，
    终止状态 Q(s,a) = R(s)。

    Raises:
        SingularSystemError: 方程组奇异
    """
    _check_model(T, gamma, policy)
    if R.shape != (T.shape[0],):
        raise DimensionMismatchError(f"奖励向量长度应为 {T.shape[0]}，实际为 {R.shape}")
    if terminal is None:
        terminal = absorbing_states(T)

    n, n_actions, _ = T.shape
    # (s,a) -> (s',a') 的转移矩阵
    P = (T[:, :, :, None] * policy[None, None, :, :]).reshape(n * n_actions, n * n_actions)
    P[np.repeat(terminal, n_actions)] = 0.0
    rhs = np.repeat(R, n_actions)
    try:
        q = np.linalg.solve(np.eye(n * n_actions) - gamma * P, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"策略评估方程组奇异: {e}") from e
    return q.reshape(n, n_actions)


def value_iteration(
    T: np.ndarray,
    R: np.ndarray,
    gamma: float,
    tol: float = 1e-10,
    terminal: Optional[np.ndarray] = None,
    max_iter: int = 100_000,
) -> np.ndarray:
    """价值迭代求 Q*

    采用转移奖励约定: Q*(s,a) = Σ_s' T(s'|s,a) [R(s') + γ max_a' Q*(s',a')]，
    终止状态 Q* = 0。返回值的 Bellman 残差 (最大范数) 不超过 tol。

    Raises:
        ConvergenceFailureError: 超过 max_iter 仍未收敛
    """
    _check_model(T, gamma)
    if tol <= 0.0:
        raise RangeError("tol", "必须为正")
    if terminal is None:
        terminal = absorbing_states(T)

    n, n_actions, _ = T.shape
    Q = np.zeros((n, n_actions))
    for it in range(max_iter):
        V = np.where(terminal, 0.0, Q.max(axis=1))
        Q_new = T @ (R + gamma * V)
        Q_new[terminal] = 0.0
        delta = float(np.max(np.abs(Q_new - Q)))
        Q = Q_new
        if delta * gamma <= tol or delta == 0.0:
            logger.debug(f"价值迭代收敛: {it + 1} 次迭代，残差 {delta * gamma:.3e}")
            return Q
    raise ConvergenceFailureError(f"价值迭代 {max_iter} 次迭代未收敛")


def bellman_residual(Q: np.ndarray, T: np.ndarray, R: np.ndarray, gamma: float, terminal=None) -> float:
    """Q 在最优 Bellman 算子下的残差 (最大范数)"""
    if terminal is None:
        terminal = absorbing_states(T)
    V = np.where(terminal, 0.0, Q.max(axis=1))
    target = T @ (R + gamma * V)
    target[terminal] = 0.0
    return float(np.max(np.abs(target - Q)))


def optimal_return(model, grid_map, gamma: float = 0.99) -> float:
    """Q* 贪心策略从各出生格出发的平均 (不折扣) 回合回报"""
    Q = value_iteration(model.T, model.R, gamma, terminal=model.terminal)
    actions = np.argmax(Q, axis=1)
    returns = []
    for s0 in model.start_states:
        s, total = s0, 0.0
        for _ in range(grid_map.step_limit):
            s = int(model.next_state[s, actions[s]])
            total += float(model.R[s])
            if model.terminal[s]:
                break
        returns.append(total)
    return float(np.mean(returns))
