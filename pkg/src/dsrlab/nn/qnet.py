# -*- coding: utf-8 -*-
"""
对照用 Q 网络
与 DSR 相同的特征主干加一个线性 Q 头，目标网络为整套参数的拷贝
"""

from typing import Optional

import numpy as np

from ..core.exceptions import DimensionMismatchError, EmptyBatchError
from .layers import dense_backward, dense_forward, init_dense
from .model import (
    GradResult,
    ModelParams,
    NetworkSpec,
    _check_actions,
    _rng,
    flatten_obs,
    input_tensors,
    normalize_input,
)


class QNetParams(ModelParams):
    """``theta.*`` 与 ``q.W``/``q.b`` 可训练，``*_target`` 为目标网络"""

    trainable_groups = ("theta", "q")


def init_qnet_params(
    spec: NetworkSpec,
    seed: int | np.random.Generator,
    input_stats: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> QNetParams:
    """主干与 Q 头随机初始化，目标网络为其拷贝；input_stats 的含义同 init_params"""
    spec.validate()
    rng = _rng(seed)
    tensors: dict[str, np.ndarray] = {}
    init_dense(tensors, "theta", [spec.in_dim, *spec.hidden, spec.feature_dim], rng)
    init_dense(tensors, "q", [spec.feature_dim, spec.n_actions], rng)
    tensors.update(input_tensors(spec, input_stats))
    params = QNetParams(spec, tensors)
    sync_qnet_target(params)
    return params


def sync_qnet_target(params: QNetParams) -> QNetParams:
    """目标网络 ← 在线网络 (深拷贝)"""
    for name in list(params.tensors):
        group = name.split(".")[0]
        if group in QNetParams.trainable_groups:
            rest = name[len(group):]
            params[f"{group}_target{rest}"] = params[name].copy()
    return params


def _q_forward(params: QNetParams, x: np.ndarray, target: bool):
    suffix = "_target" if target else ""
    spec = params.spec
    x = normalize_input(params, x)
    phi, cache_f = dense_forward(
        params.tensors, f"theta{suffix}", spec.n_layers, x, spec.phi_activation
    )
    q, cache_q = dense_forward(params.tensors, f"q{suffix}", 1, phi, "linear")
    return q, cache_f, cache_q


def q_forward(params: QNetParams, obs: np.ndarray, target: bool = False) -> np.ndarray:
    """Q(s, ·)；单个观测返回 (A,)，一批返回 (B, A)"""
    x, single = flatten_obs(params.spec, obs)
    q, _, _ = _q_forward(params, x, target)
    return q[0] if single else q


def grad_q_phase(
    params: QNetParams,
    obs: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    next_obs: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
) -> GradResult:
    """一步 Q 学习损失 mean_b (y_b - Q(s_b, a_b))^2

    y = r + γ·max_a' Q_target(s', a')，进入终止状态时 y = r。
    """
    if np.size(obs) == 0:
        raise EmptyBatchError("Q 学习的批次为空")
    spec = params.spec
    x, _ = flatten_obs(spec, obs)
    x_next, _ = flatten_obs(spec, next_obs)
    B = x.shape[0]
    rewards = np.asarray(rewards, dtype=np.float64).reshape(-1)
    if rewards.shape[0] != B or x_next.shape[0] != B:
        raise DimensionMismatchError("批次内各字段长度不一致")
    actions = _check_actions(params, np.asarray(actions).reshape(-1), B)
    terminal = np.broadcast_to(np.asarray(terminal, dtype=bool), (B,))

    q_next, _, _ = _q_forward(params, x_next, target=True)
    y = rewards + gamma * np.where(terminal, 0.0, q_next.max(axis=1))

    q, cache_f, cache_q = _q_forward(params, x, target=False)
    rows = np.arange(B)
    err = q[rows, actions] - y
    loss = float(np.mean(err**2))

    d_q = np.zeros_like(q)
    d_q[rows, actions] = 2.0 / B * err
    grads, d_phi = dense_backward(params.tensors, "q", 1, cache_q, d_q)
    g_trunk, _ = dense_backward(params.tensors, "theta", spec.n_layers, cache_f, d_phi)
    grads.update(g_trunk)
    return GradResult(
        loss=loss,
        parts={"loss_q": loss},
        grads=grads,
        signature=cache_f.relu_pattern(),
    )
