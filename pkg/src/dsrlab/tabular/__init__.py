# -*- coding: utf-8 -*-
"""
表格模块
精确的 SR 与价值基准，用作神经网络结果的对照
"""

from .planning import (
    absorbing_states,
    bellman_residual,
    epsilon_greedy_policy,
    greedy_policy,
    optimal_return,
    policy_evaluation,
    uniform_policy,
    value_iteration,
)
from .sr import (
    Episode,
    enumerate_transitions,
    export_sr_csv,
    monte_carlo_sr,
    q_from_sr,
    q_transition_from_sr,
    sample_episodes,
    sr_closed_form,
    sr_identity,
    sr_residual,
    sr_td_sweep,
    state_sr,
)

__all__ = [
    "Episode",
    "absorbing_states",
    "bellman_residual",
    "enumerate_transitions",
    "epsilon_greedy_policy",
    "export_sr_csv",
    "greedy_policy",
    "monte_carlo_sr",
    "optimal_return",
    "policy_evaluation",
    "q_from_sr",
    "q_transition_from_sr",
    "sample_episodes",
    "sr_closed_form",
    "sr_identity",
    "sr_residual",
    "sr_td_sweep",
    "state_sr",
    "uniform_policy",
    "value_iteration",
]
