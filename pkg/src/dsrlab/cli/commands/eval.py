# -*- coding: utf-8 -*-
"""
eval 命令实现
"""

from ...core import ConfigManager, get_logger
from ...harness.experiments import run_eval_experiment
from .common import experiment_config, print_outcome

logger = get_logger()


def cmd_eval(config_manager: ConfigManager, args) -> int:
    """评估快照中的贪心策略"""
    config = experiment_config(config_manager, args, **{"eval.episodes": args.episodes})
    if not args.snapshot:
        logger.warning_print("未指定 --snapshot，只评估最优策略与随机策略")
    logger.step(f"评估 {config.eval.episodes} 个回合 (ε = {config.eval.epsilon})...")
    outcome = run_eval_experiment(
        config, snapshot_path=args.snapshot, seed=args.seed, output=args.output
    )
    print_outcome(outcome)
    return 0
