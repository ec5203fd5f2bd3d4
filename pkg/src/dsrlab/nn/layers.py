# -*- coding: utf-8 -*-
"""
全连接层堆叠
z = h @ W + b，隐藏层使用 ReLU，输出层为线性或 ReLU

参数以 ``{prefix}.{i}.W`` / ``{prefix}.{i}.b`` 命名存放在同一个张量字典中。
"""

from dataclasses import dataclass, field

import numpy as np

from ..core.exceptions import BadSpecError


@dataclass
class DenseCache:
    """反向传播所需的中间量"""

    inputs: list[np.ndarray] = field(default_factory=list)
    pre_activations: list[np.ndarray] = field(default_factory=list)
    rectified: list[bool] = field(default_factory=list)

    def relu_pattern(self) -> bytes:
        """所有 ReLU 的开关状态，用来识别不可导点"""
        return b"".join(
            np.packbits(z > 0.0).tobytes()
            for z, on in zip(self.pre_activations, self.rectified)
            if on
        )


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def layer_names(prefix: str, n_layers: int) -> list[tuple[str, str]]:
    return [(f"{prefix}.{i}.W", f"{prefix}.{i}.b") for i in range(n_layers)]


def init_dense(
    tensors: dict[str, np.ndarray],
    prefix: str,
    dims: list[int],
    rng: np.random.Generator,
) -> None:
    """按 fan-in 缩放的均匀分布初始化一组全连接层

    W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in))，偏置为 0。
    """
    if any(d < 1 for d in dims):
        raise BadSpecError(f"层宽度必须为正: {dims}")
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = np.sqrt(6.0 / fan_in)
        tensors[f"{prefix}.{i}.W"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        tensors[f"{prefix}.{i}.b"] = np.zeros(fan_out)


def dense_forward(
    tensors: dict[str, np.ndarray],
    prefix: str,
    n_layers: int,
    x: np.ndarray,
    out_activation: str = "linear",
) -> tuple[np.ndarray, DenseCache]:
    """前向传播

    Args:
        tensors: 参数字典
        prefix: 参数名前缀
        n_layers: 层数
        x: 输入 (B, in_dim)
        out_activation: 输出层激活，linear 或 relu

    Returns:
        (输出, 缓存)
    """
    cache = DenseCache()
    h = x
    for i, (w_name, b_name) in enumerate(layer_names(prefix, n_layers)):
        cache.inputs.append(h)
        z = h @ tensors[w_name] + tensors[b_name]
        cache.pre_activations.append(z)
        linear = i == n_layers - 1 and out_activation == "linear"
        cache.rectified.append(not linear)
        h = z if linear else relu(z)
    return h, cache


def dense_backward(
    tensors: dict[str, np.ndarray],
    prefix: str,
    n_layers: int,
    cache: DenseCache,
    grad_out: np.ndarray,
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """反向传播

    Args:
        grad_out: 损失对输出的梯度 (B, out_dim)

    Returns:
        (参数梯度字典, 损失对输入的梯度)
    """
    grads: dict[str, np.ndarray] = {}
    delta = grad_out
    names = layer_names(prefix, n_layers)
    for i in reversed(range(n_layers)):
        z = cache.pre_activations[i]
        if cache.rectified[i]:
            delta = delta * (z > 0.0)
        w_name, b_name = names[i]
        grads[w_name] = cache.inputs[i].T @ delta
        grads[b_name] = delta.sum(axis=0)
        delta = delta @ tensors[w_name].T
    return grads, delta
