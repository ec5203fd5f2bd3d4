# -*- coding: utf-8 -*-
"""
DSR 网络
特征编码 f_θ、逐动作的后继头 u_α、解码器 g_θ̃ 与线性奖励权重 w，
以及两个交替优化阶段的损失和精确梯度
"""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..core.const import (
    N_ACTIONS,
    PHI_ACTIVATIONS,
    SUCCESSOR_TARGETS,
    TERMINAL_BOOTSTRAP_MODES,
)
from ..core.exceptions import (
    BadActionError,
    BadSpecError,
    DimensionMismatchError,
    EmptyBatchError,
    ShapeMismatchError,
)
from .layers import dense_backward, dense_forward, init_dense

TRAINABLE_GROUPS = ("theta", "alpha", "theta_tilde", "w")


@dataclass(frozen=True)
class NetworkSpec:
    """网络结构描述"""

    obs_shape: tuple[int, ...]
    n_actions: int = N_ACTIONS
    hidden: tuple[int, ...] = (64, 64)
    feature_dim: int = 64
    phi_activation: str = "linear"

    @property
    def in_dim(self) -> int:
        return int(np.prod(self.obs_shape))

    @property
    def n_layers(self) -> int:
        return len(self.hidden) + 1

    def validate(self) -> None:
        if not self.obs_shape or any(d < 1 for d in self.obs_shape):
            raise BadSpecError(f"观测形状无效: {self.obs_shape}")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise BadSpecError(f"隐藏层宽度无效: {self.hidden}")
        if self.feature_dim < 1:
            raise BadSpecError(f"特征维度必须为正: {self.feature_dim}")
        if self.n_actions < 1:
            raise BadSpecError(f"动作数必须为正: {self.n_actions}")
        if self.phi_activation not in PHI_ACTIVATIONS:
            raise BadSpecError(f"未知的特征层激活: {self.phi_activation}")

    @classmethod
    def from_config(cls, obs_shape: tuple[int, ...], network, n_actions: int = N_ACTIONS) -> "NetworkSpec":
        return cls(
            obs_shape=tuple(obs_shape),
            n_actions=n_actions,
            hidden=tuple(network.hidden),
            feature_dim=network.feature_dim,
            phi_activation=network.phi_activation,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "obs_shape": list(self.obs_shape),
            "n_actions": self.n_actions,
            "hidden": list(self.hidden),
            "feature_dim": self.feature_dim,
            "phi_activation": self.phi_activation,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkSpec":
        return cls(
            obs_shape=tuple(data["obs_shape"]),
            n_actions=int(data["n_actions"]),
            hidden=tuple(data["hidden"]),
            feature_dim=int(data["feature_dim"]),
            phi_activation=data["phi_activation"],
        )


class ModelParams:
    """按名字存放的参数张量

    名字的第一段是参数组: ``theta.0.W``、``alpha.W``、``alpha_prev.b``、``w`` 等。
    """

    trainable_groups: tuple[str, ...] = TRAINABLE_GROUPS

    def __init__(self, spec: NetworkSpec, tensors: dict[str, np.ndarray]):
        self.spec = spec
        self.tensors = tensors

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self.tensors[name] = value

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    @property
    def feature_dim(self) -> int:
        return self.spec.feature_dim

    @property
    def n_actions(self) -> int:
        return self.spec.n_actions

    def group(self, name: str) -> dict[str, np.ndarray]:
        """某个参数组的全部张量"""
        return {k: v for k, v in self.tensors.items() if k.split(".")[0] == name}

    def trainable_names(self) -> list[str]:
        return [k for k in self.tensors if k.split(".")[0] in self.trainable_groups]

    def copy(self) -> "ModelParams":
        return type(self)(self.spec, {k: v.copy() for k, v in self.tensors.items()})

    def equals(self, other: "ModelParams", groups: Optional[tuple[str, ...]] = None) -> bool:
        """逐位比较 (可限定参数组)"""
        names = [
            k for k in self.tensors if groups is None or k.split(".")[0] in groups
        ]
        return all(
            k in other.tensors and np.array_equal(self.tensors[k], other.tensors[k])
            for k in names
        )

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(v))) for v in self.tensors.values())


@dataclass
class GradResult:
    """一次损失评估: 总损失、分项损失与梯度

    signature 记录 ReLU 开关与 argmax 选择，有限差分检查用它识别不可导点。
    """

    loss: float
    parts: dict[str, float]
    grads: dict[str, np.ndarray]
    signature: bytes = field(default=b"", repr=False)

    def full(self, params: ModelParams) -> dict[str, np.ndarray]:
        """补全为全部可训练张量的梯度，本阶段不训练的张量为 0"""
        return {
            name: self.grads[name] if name in self.grads else np.zeros_like(params[name])
            for name in params.trainable_names()
        }


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def init_params(
    spec: NetworkSpec,
    seed: int | np.random.Generator,
    input_stats: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> ModelParams:
    """初始化 DSR 参数

    所有权重使用 fan-in 缩放的均匀分布，偏置为 0；alpha_prev 初始化为 alpha 的拷贝。
    input_stats 为 (均值, 缩放) 时存为不参与训练的 ``input.mean`` / ``input.scale``，
    编码器先对观测做标准化；缺省时为恒等变换。

    Raises:
        BadSpecError: 网络结构无效
        ShapeMismatchError: 标准化统计量的长度与输入维度不一致
    """
    spec.validate()
    rng = _rng(seed)
    D, A = spec.feature_dim, spec.n_actions
    tensors: dict[str, np.ndarray] = {}

    init_dense(tensors, "theta", [spec.in_dim, *spec.hidden, D], rng)
    bound = np.sqrt(6.0 / D)
    tensors["alpha.W"] = rng.uniform(-bound, bound, size=(A, D, D))
    tensors["alpha.b"] = np.zeros((A, D))
    init_dense(tensors, "theta_tilde", [D, *reversed(spec.hidden), spec.in_dim], rng)
    tensors["w"] = rng.uniform(-bound, bound, size=D)
    tensors["alpha_prev.W"] = tensors["alpha.W"].copy()
    tensors["alpha_prev.b"] = tensors["alpha.b"].copy()
    tensors.update(input_tensors(spec, input_stats))
    return ModelParams(spec, tensors)


def input_tensors(
    spec: NetworkSpec, input_stats: Optional[tuple[np.ndarray, np.ndarray]]
) -> dict[str, np.ndarray]:
    """``input.mean`` 与 ``input.scale``，两者都是长度为 in_dim 的向量"""
    if input_stats is None:
        return {"input.mean": np.zeros(spec.in_dim), "input.scale": np.ones(spec.in_dim)}
    mean, scale = (np.asarray(v, dtype=np.float64).reshape(-1) for v in input_stats)
    if mean.shape != (spec.in_dim,) or scale.shape != (spec.in_dim,):
        raise ShapeMismatchError(
            f"标准化统计量长度 {mean.shape}/{scale.shape} 与输入维度 {spec.in_dim} 不一致"
        )
    return {"input.mean": mean.copy(), "input.scale": scale.copy()}


def normalize_input(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """(x - mean)·scale；没有标准化张量的旧参数原样返回"""
    if "input.mean" not in params:
        return x
    return (x - params["input.mean"]) * params["input.scale"]


# =============================================================================
# 前向传播
# =============================================================================


def flatten_obs(spec: NetworkSpec, obs: np.ndarray) -> tuple[np.ndarray, bool]:
    """把单个或一批观测整理为 (B, in_dim)，同时返回是否为单个样本"""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape == tuple(spec.obs_shape) or obs.shape == (spec.in_dim,):
        return obs.reshape(1, spec.in_dim), True
    if obs.ndim >= 1 and (
        obs.shape[1:] == tuple(spec.obs_shape) or (obs.ndim == 2 and obs.shape[1] == spec.in_dim)
    ):
        return obs.reshape(obs.shape[0], spec.in_dim), False
    raise ShapeMismatchError(f"观测形状 {obs.shape} 与网络输入 {spec.obs_shape} 不一致")


def _features(params: ModelParams, x: np.ndarray, prefix: str = "theta"):
    x = normalize_input(params, x)
    return dense_forward(params.tensors, prefix, params.spec.n_layers, x, params.spec.phi_activation)


def forward_features(params: ModelParams, obs: np.ndarray) -> np.ndarray:
    """φ = f_θ(obs)；单个观测返回 (D,)，一批返回 (B, D)"""
    x, single = flatten_obs(params.spec, obs)
    phi, _ = _features(params, x)
    return phi[0] if single else phi


def _check_phi(params: ModelParams, phi: np.ndarray) -> tuple[np.ndarray, bool]:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape[-1] != params.feature_dim or phi.ndim > 2:
        raise DimensionMismatchError(f"特征维度 {phi.shape} 与 D={params.feature_dim} 不一致")
    return np.atleast_2d(phi), phi.ndim == 1


def _check_actions(params: ModelParams, action, batch: int) -> np.ndarray:
    actions = np.asarray(action)
    if actions.dtype.kind not in "iu" or np.any(actions < 0) or np.any(actions >= params.n_actions):
        raise BadActionError(f"无效的动作: {action}")
    return np.broadcast_to(actions.astype(np.intp), (batch,))


def forward_successor(
    params: ModelParams, phi: np.ndarray, action, target: bool = False
) -> np.ndarray:
    """m_sa = u_α(φ, a)，每个动作一个独立的线性头

    Args:
        phi: (D,) 或 (B, D)
        action: 单个动作或长度为 B 的动作数组
        target: True 时使用缓存的 alpha_prev
    """
    prefix = "alpha_prev" if target else "alpha"
    phi2, single = _check_phi(params, phi)
    actions = _check_actions(params, action, phi2.shape[0])
    W, b = params[f"{prefix}.W"], params[f"{prefix}.b"]
    m = np.einsum("bd,bde->be", phi2, W[actions]) + b[actions]
    return m[0] if single else m


def forward_successor_all(params: ModelParams, phi: np.ndarray, target: bool = False) -> np.ndarray:
    """所有动作的后继特征，(B, A, D) 或单个样本 (A, D)"""
    prefix = "alpha_prev" if target else "alpha"
    phi2, single = _check_phi(params, phi)
    m = np.einsum("bd,ade->bae", phi2, params[f"{prefix}.W"]) + params[f"{prefix}.b"][None]
    return m[0] if single else m


def forward_decoder(params: ModelParams, phi: np.ndarray) -> np.ndarray:
    """ŝ = g_θ̃(φ)，输出与观测同形"""
    phi2, single = _check_phi(params, phi)
    out, _ = dense_forward(params.tensors, "theta_tilde", params.spec.n_layers, phi2, "linear")
    shape = tuple(params.spec.obs_shape)
    return out.reshape(shape) if single else out.reshape((-1, *shape))


def predict_reward(w: np.ndarray, phi: np.ndarray) -> np.ndarray | float:
    """R(s) ≈ φ_s · w"""
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape[-1] != w.shape[0]:
        raise DimensionMismatchError(f"特征长度 {phi.shape[-1]} 与 w 长度 {w.shape[0]} 不一致")
    out = phi @ w
    return float(out) if np.ndim(out) == 0 else out


def q_values(params: ModelParams, phi: np.ndarray) -> np.ndarray:
    """Q(s, ·) = m_s· · w"""
    return forward_successor_all(params, phi) @ params["w"]


def greedy_actions(params: ModelParams, obs: np.ndarray) -> np.ndarray:
    """逐样本贪心动作，平局取编号最小者"""
    x, _ = flatten_obs(params.spec, obs)
    return np.argmax(q_values(params, forward_features(params, x)), axis=1)


# =============================================================================
# 损失与梯度
# =============================================================================


def grad_reward_phase(
    params: ModelParams,
    obs: np.ndarray,
    rewards: np.ndarray,
    reward_weight: float = 1.0,
    recon_weight: float = 1.0,
) -> GradResult:
    """奖励阶段: L = reward_weight·L^r + recon_weight·L^a

    L^r = mean_b (R_b - φ_b·w)^2，L^a = 逐元素平均的 (g_θ̃(φ) - s)^2。
    梯度只涉及 θ、w、θ̃。

    Raises:
        EmptyBatchError: 空批次
    """
    spec = params.spec
    if np.size(obs) == 0:
        raise EmptyBatchError("奖励阶段的批次为空")
    x, _ = flatten_obs(spec, obs)
    B = x.shape[0]
    rewards = np.asarray(rewards, dtype=np.float64).reshape(-1)
    if rewards.shape[0] != B:
        raise DimensionMismatchError(f"奖励数量 {rewards.shape[0]} 与批次大小 {B} 不一致")

    t = params.tensors
    phi, cache_f = _features(params, x)
    err_r = phi @ t["w"] - rewards
    loss_r = float(np.mean(err_r**2))

    recon, cache_d = dense_forward(t, "theta_tilde", spec.n_layers, phi, "linear")
    err_a = recon - x
    loss_a = float(np.mean(err_a**2))

    d_r = reward_weight * 2.0 / B * err_r
    grads = {"w": phi.T @ d_r}
    d_phi = np.outer(d_r, t["w"])
    g_dec, d_phi_dec = dense_backward(
        t, "theta_tilde", spec.n_layers, cache_d, recon_weight * 2.0 / err_a.size * err_a
    )
    grads.update(g_dec)
    g_enc, _ = dense_backward(t, "theta", spec.n_layers, cache_f, d_phi + d_phi_dec)
    grads.update(g_enc)

    return GradResult(
        loss=reward_weight * loss_r + recon_weight * loss_a,
        parts={"loss_r": loss_r, "loss_a": loss_a},
        grads=grads,
        signature=cache_f.relu_pattern() + cache_d.relu_pattern(),
    )


def sr_targets(
    params: ModelParams,
    phi: np.ndarray,
    phi_next: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
    terminal_bootstrap: str = "absorbing",
    next_action: str = "greedy",
) -> tuple[np.ndarray, np.ndarray]:
    """后继特征的自举目标 φ_t + γ·u_{α_prev}(φ_{t+1}, a')

    greedy 模式下 a' = argmax_a u_α(φ_{t+1}, a)·w，使用当前的 α 和 w；uniform 模式对
    所有动作的 u_{α_prev}(φ_{t+1}, ·) 取平均，对应均匀随机策略的 SR，此时 a' 记为 -1。
    进入终止状态的样本: absorbing 模式目标为 φ_t + γ·φ_{t+1}，cut 模式目标为 φ_t。

    Returns:
        (目标, a')
    """
    if terminal_bootstrap not in TERMINAL_BOOTSTRAP_MODES:
        raise BadSpecError(f"未知的终止自举方式: {terminal_bootstrap}")
    if next_action not in SUCCESSOR_TARGETS:
        raise BadSpecError(f"未知的后继目标动作: {next_action}")
    if next_action == "uniform":
        a_next = np.full(phi_next.shape[0], -1, dtype=np.intp)
        target = phi + gamma * forward_successor_all(params, phi_next, target=True).mean(axis=1)
    else:
        a_next = np.argmax(q_values(params, phi_next), axis=1)
        target = phi + gamma * forward_successor(params, phi_next, a_next, target=True)
    if np.any(terminal):
        if terminal_bootstrap == "absorbing":
            target[terminal] = phi[terminal] + gamma * phi_next[terminal]
        else:
            target[terminal] = phi[terminal]
    return target, a_next


def grad_sr_phase(
    params: ModelParams,
    obs: np.ndarray,
    actions: np.ndarray,
    next_obs: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
    terminal_bootstrap: str = "absorbing",
    next_action: str = "greedy",
) -> GradResult:
    """SR 阶段: L^m = mean_b ||target_b - u_α(φ_t, a_t)||^2

    φ 视为常量，梯度只流向 α。next_action 见 sr_targets。

    Raises:
        EmptyBatchError: 空批次
    """
    spec = params.spec
    if np.size(obs) == 0:
        raise EmptyBatchError("SR 阶段的批次为空")
    x, _ = flatten_obs(spec, obs)
    x_next, _ = flatten_obs(spec, next_obs)
    B = x.shape[0]
    if x_next.shape[0] != B:
        raise DimensionMismatchError("obs 与 next_obs 的批次大小不一致")
    actions = _check_actions(params, np.asarray(actions).reshape(-1), B)
    terminal = np.broadcast_to(np.asarray(terminal, dtype=bool), (B,))

    phi, _ = _features(params, x)
    phi_next, _ = _features(params, x_next)
    target, a_next = sr_targets(
        params, phi, phi_next, terminal, gamma, terminal_bootstrap, next_action
    )
    diff = forward_successor(params, phi, actions) - target
    loss = float(np.sum(diff**2) / B)

    d = 2.0 / B * diff
    dW = np.zeros_like(params["alpha.W"])
    db = np.zeros_like(params["alpha.b"])
    for a in range(spec.n_actions):
        mask = actions == a
        if np.any(mask):
            dW[a] = phi[mask].T @ d[mask]
            db[a] = d[mask].sum(axis=0)

    return GradResult(
        loss=loss,
        parts={"loss_m": loss},
        grads={"alpha.W": dW, "alpha.b": db},
        signature=a_next.astype(np.int8).tobytes(),
    )
