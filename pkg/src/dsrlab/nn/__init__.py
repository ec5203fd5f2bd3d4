# -*- coding: utf-8 -*-
"""
神经网络模块
带精确反向传播的最小全连接网络、DSR 各分支与损失、动量 SGD、梯度检查
"""

from .gradcheck import (
    GradCheckReport,
    GroupCheck,
    check_q_phase,
    check_reward_phase,
    check_sr_phase,
    finite_diff_check,
)
from .model import (
    TRAINABLE_GROUPS,
    GradResult,
    ModelParams,
    NetworkSpec,
    flatten_obs,
    forward_decoder,
    forward_features,
    forward_successor,
    forward_successor_all,
    grad_reward_phase,
    grad_sr_phase,
    greedy_actions,
    init_params,
    input_tensors,
    normalize_input,
    predict_reward,
    q_values,
    sr_targets,
)
from .optim import OptimizerState, sgd_momentum_step
from .qnet import QNetParams, grad_q_phase, init_qnet_params, q_forward, sync_qnet_target

__all__ = [
    "TRAINABLE_GROUPS",
    "GradCheckReport",
    "GradResult",
    "GroupCheck",
    "ModelParams",
    "NetworkSpec",
    "OptimizerState",
    "QNetParams",
    "check_q_phase",
    "check_reward_phase",
    "check_sr_phase",
    "finite_diff_check",
    "flatten_obs",
    "forward_decoder",
    "forward_features",
    "forward_successor",
    "forward_successor_all",
    "grad_q_phase",
    "grad_reward_phase",
    "grad_sr_phase",
    "greedy_actions",
    "init_params",
    "init_qnet_params",
    "input_tensors",
    "normalize_input",
    "predict_reward",
    "q_forward",
    "q_values",
    "sgd_momentum_step",
    "sr_targets",
    "sync_qnet_target",
]
