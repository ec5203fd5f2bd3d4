# -*- coding: utf-8 -*-
"""
表格后继表示 (SR)
闭式解、TD(0) 扫描、由 SR 重建 Q 以及蒙特卡洛占用估计

SR 张量 M 的形状为 (n_states, n_actions, n_states)，M[s, a] 是从 (s, a) 出发、
之后按策略行动的折扣状态占用。终止状态的行固定为 e_s。
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..core.exceptions import DimensionMismatchError, MetricsError, RangeError, SingularSystemError
from ..core.logger import get_logger
from .planning import _check_model, absorbing_states

logger = get_logger()


@dataclass
class Episode:
    """一条轨迹: states 比 actions 多一个 (末状态)，或等长 (记录了下一动作)"""

    states: list[int]
    actions: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return max(len(self.states) - 1, 0)


def sr_identity(n_states: int, n_actions: int) -> np.ndarray:
    """γ=0 时的 SR: M[s, a] = e_s，也是 TD 学习的初值"""
    return np.broadcast_to(np.eye(n_states)[:, None, :], (n_states, n_actions, n_states)).copy()


def state_sr(T: np.ndarray, policy: np.ndarray, gamma: float, terminal=None) -> np.ndarray:
    """策略下的状态 SR: M̄ = (I - γ P̃)^-1，P̃ 为去掉终止行的 P_π"""
    _check_model(T, gamma, policy)
    if terminal is None:
        terminal = absorbing_states(T)
    n = T.shape[0]
    P = np.einsum("sa,sat->st", policy, T)
    P[terminal] = 0.0
    try:
        return np.linalg.solve(np.eye(n) - gamma * P, np.eye(n))
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(f"SR 方程组奇异: {e}") from e


def sr_closed_form(
    T: np.ndarray,
    policy: np.ndarray,
    gamma: float,
    terminal: Optional[np.ndarray] = None,
) -> np.ndarray:
    """线性求解 SR 递推

    M(s,a,·) = e_s + γ Σ_s' T(s'|s,a) Σ_a' π(a'|s') M(s',a',·)，终止状态只贡献 e_s。

    Args:
        T: 转移张量 (n, A, n)
        policy: 策略矩阵 (n, A)
        gamma: 折扣因子，[0, 1)
        terminal: 终止状态掩码，缺省时由 T 的吸收状态推断

    Returns:
        SR 张量 (n, A, n)
    """
    if terminal is None:
        terminal = absorbing_states(T)
    n = T.shape[0]
    M_bar = state_sr(T, policy, gamma, terminal)
    M = np.eye(n)[:, None, :] + gamma * (T @ M_bar)
    M[terminal] = np.eye(n)[terminal][:, None, :]
    return M


def sr_residual(
    M: np.ndarray, T: np.ndarray, policy: np.ndarray, gamma: float, terminal=None
) -> float:
    """SR 递推残差的最大范数"""
    if terminal is None:
        terminal = absorbing_states(T)
    n = T.shape[0]
    M_bar = np.einsum("sa,sat->st", policy, M)
    target = np.eye(n)[:, None, :] + gamma * (T @ M_bar)
    target[terminal] = np.eye(n)[terminal][:, None, :]
    return float(np.max(np.abs(target - M)))


def q_from_sr(M: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Q(s,a) = Σ_s' M(s,a,s') R(s')"""
    if M.shape[-1] != R.shape[0]:
        raise DimensionMismatchError(f"SR 末维 {M.shape[-1]} 与奖励长度 {R.shape[0]} 不一致")
    return M @ R


def q_transition_from_sr(
    M: np.ndarray, T: np.ndarray, policy: np.ndarray, R: np.ndarray, terminal=None
) -> np.ndarray:
    """把 SR 得到的状态奖励约定 Q 换算为价值迭代使用的转移奖励约定"""
    if terminal is None:
        terminal = absorbing_states(T)
    V = np.sum(policy * q_from_sr(M, R), axis=1)
    Q = T @ V
    Q[terminal] = 0.0
    return Q


def sr_td_sweep(
    M: np.ndarray,
    episodes: Iterable[Episode],
    policy: np.ndarray,
    gamma: float,
    lr: float,
    terminal: Optional[np.ndarray] = None,
    backward: bool = False,
) -> np.ndarray:
    """沿轨迹做一遍 TD(0) 更新

    M(s_t,a_t,·) += lr·[e_{s_t} + γ M(s_{t+1},a_{t+1},·) - M(s_t,a_t,·)]。
    没有记录下一动作时用策略期望代替；下一状态终止时用 e_{s_{t+1}}。

    Returns:
        更新后的新 SR 张量 (输入不被修改)
    """
    if not 0.0 < lr <= 1.0:
        raise RangeError("lr", f"必须在 (0, 1] 内，实际为 {lr}")
    M = M.copy()
    n = M.shape[0]
    eye = np.eye(n)
    if terminal is None:
        terminal = np.zeros(n, dtype=bool)

    for episode in episodes:
        steps = range(len(episode))
        for t in reversed(steps) if backward else steps:
            s, a, s_next = episode.states[t], episode.actions[t], episode.states[t + 1]
            if terminal[s_next]:
                successor = eye[s_next]
            elif t + 1 < len(episode.actions):
                successor = M[s_next, episode.actions[t + 1]]
            else:
                successor = policy[s_next] @ M[s_next]
            M[s, a] += lr * (eye[s] + gamma * successor - M[s, a])
    return M


def enumerate_transitions(model) -> list[Episode]:
    """每个非终止 (s, a) 各一条单步轨迹，用于求 TD 不动点"""
    return [
        Episode(states=[s, int(model.next_state[s, a])], actions=[a])
        for s in range(model.n_states)
        if not model.terminal[s]
        for a in range(model.n_actions)
    ]


def sample_episodes(
    model,
    policy: np.ndarray,
    n_episodes: int,
    rng: np.random.Generator,
    max_steps: int = 500,
    starts: Optional[list[int]] = None,
) -> list[Episode]:
    """按策略在转移模型上采样轨迹"""
    starts = starts if starts is not None else model.start_states
    cumulative = np.cumsum(policy, axis=1)
    episodes = []
    for _ in range(n_episodes):
        s = int(starts[int(rng.integers(len(starts)))])
        states, actions = [s], []
        for _ in range(max_steps):
            a = int(min(np.searchsorted(cumulative[s], rng.random(), side="right"), model.n_actions - 1))
            s = int(model.next_state[s, a])
            actions.append(a)
            states.append(s)
            if model.terminal[s]:
                break
        episodes.append(Episode(states=states, actions=actions))
    return episodes


def monte_carlo_sr(
    model,
    policy: np.ndarray,
    gamma: float,
    state: int,
    action: int,
    n_rollouts: int,
    rng: np.random.Generator,
    horizon: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """向量化蒙特卡洛估计 M(state, action, ·)

    Returns:
        (均值, 标准误)，长度均为 n_states
    """
    n = model.n_states
    if horizon is None:
        horizon = int(np.ceil(np.log(1e-12) / np.log(gamma))) if gamma > 0.0 else 1

    occupancy = np.zeros((n_rollouts, n))
    rows = np.arange(n_rollouts)
    occupancy[:, state] = 1.0
    if model.terminal[state]:
        return occupancy.mean(axis=0), np.zeros(n)

    cumulative = np.cumsum(policy, axis=1)
    current = np.full(n_rollouts, state, dtype=np.intp)
    actions = np.full(n_rollouts, action, dtype=np.intp)
    alive = np.ones(n_rollouts, dtype=bool)
    discount = 1.0
    for _ in range(horizon):
        discount *= gamma
        idx = rows[alive]
        current[idx] = model.next_state[current[idx], actions[idx]]
        occupancy[idx, current[idx]] += discount
        alive[idx] = ~model.terminal[current[idx]]
        idx = rows[alive]
        if idx.size == 0:
            break
        u = rng.random(idx.size)
        picks = (u[:, None] >= cumulative[current[idx]]).sum(axis=1)
        actions[idx] = np.minimum(picks, model.n_actions - 1)

    mean = occupancy.mean(axis=0)
    stderr = occupancy.std(axis=0, ddof=1) / np.sqrt(n_rollouts)
    return mean, stderr


def export_sr_csv(M: np.ndarray, model, path: Path) -> Path:
    """导出 SR 张量，每行一个 (状态, 动作)；state_id 为转移模型中的状态下标"""
    n = M.shape[0]
    header = ["state_id", "row", "col", "action"] + [f"m_{j}" for j in range(n)]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for s, (r, c) in enumerate(model.states):
                for a in range(M.shape[1]):
                    writer.writerow([s, r, c, a] + [repr(float(x)) for x in M[s, a]])
    except OSError as e:
        raise MetricsError(f"写入 SR 文件失败: {e}") from e
    logger.debug(f"SR 已导出: {path}")
    return path
