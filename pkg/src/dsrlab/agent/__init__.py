# -*- coding: utf-8 -*-
"""
智能体模块
回放、退火、DSR 训练与远端奖励适应、对照 Q 网络、策略评估
"""

from .baseline import (
    QNetLearner,
    baseline_distal_retrain,
    baseline_q_training,
    q_learning_step,
    select_q_action,
)
from .dsr import (
    DistalResult,
    DSRLearner,
    StepReport,
    distal_reward_adapt,
    greedy_policy_matrix,
    observation_shape,
    random_policy_config,
    run_training,
    select_action,
    steps_to_tolerance,
    sync_target,
    train_random_policy_sr,
    train_step,
)
from .evaluation import (
    Actor,
    DSRActor,
    EvalResult,
    QNetActor,
    RandomActor,
    TabularActor,
    evaluate_policy,
)
from .replay import SAMPLE_MODES, Batch, ReplayBuffer, RingStore, record_transition, sample_minibatch
from .schedule import EpsilonSchedule, epsilon_at, reward_sample_count
from .snapshot import SNAPSHOT_KINDS, AgentSnapshot
from .training import (
    STREAMS,
    Learner,
    LoopState,
    TrainingResult,
    restore_streams,
    run_episodes,
    spawn_streams,
)

__all__ = [
    "SAMPLE_MODES",
    "SNAPSHOT_KINDS",
    "STREAMS",
    "Actor",
    "AgentSnapshot",
    "Batch",
    "DSRActor",
    "DSRLearner",
    "DistalResult",
    "EpsilonSchedule",
    "EvalResult",
    "Learner",
    "LoopState",
    "QNetActor",
    "QNetLearner",
    "RandomActor",
    "ReplayBuffer",
    "RingStore",
    "StepReport",
    "TabularActor",
    "TrainingResult",
    "baseline_distal_retrain",
    "baseline_q_training",
    "distal_reward_adapt",
    "epsilon_at",
    "evaluate_policy",
    "greedy_policy_matrix",
    "observation_shape",
    "q_learning_step",
    "random_policy_config",
    "record_transition",
    "restore_streams",
    "reward_sample_count",
    "run_episodes",
    "run_training",
    "sample_minibatch",
    "select_action",
    "select_q_action",
    "spawn_streams",
    "steps_to_tolerance",
    "sync_target",
    "train_random_policy_sr",
    "train_step",
]
