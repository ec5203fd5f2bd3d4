# -*- coding: utf-8 -*-
"""
distal 命令实现
"""

from ...core import ConfigManager, get_logger
from ...core.exceptions import BadArgsError
from ...harness.experiments import run_distal_experiment
from .common import experiment_config, print_outcome

logger = get_logger()


def cmd_distal(config_manager: ConfigManager, args) -> int:
    """冻结特征与 SR，只在新目标奖励下重新学习 w"""
    if not args.snapshot:
        raise BadArgsError("distal 需要 --snapshot 指定训练好的 DSR 快照")
    config = experiment_config(
        config_manager,
        args,
        **{
            "distal.goal_reward": args.goal_reward,
            "distal.baseline_snapshot": args.baseline_snapshot,
        },
    )
    logger.step(f"目标奖励改为 {config.distal.goal_reward}，重新学习 w...")
    outcome = run_distal_experiment(
        config, snapshot_path=args.snapshot, seed=args.seed, output=args.output
    )
    print_outcome(outcome)
    if outcome.results.get("steps_to_tolerance") is None:
        logger.warning_print(f"预算内未进入 {config.distal.tolerance:.0%} 容差")
    return 0
