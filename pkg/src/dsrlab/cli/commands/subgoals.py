# -*- coding: utf-8 -*-
"""
subgoals 命令实现
"""

from ...core import ConfigManager, get_logger
from ...harness.experiments import PARTITION_FILE, run_subgoal_experiment
from .common import experiment_config, print_outcome

logger = get_logger()


def cmd_subgoals(config_manager: ConfigManager, args) -> int:
    """在 SR 样本图上重复切分并输出子目标排名"""
    config = experiment_config(
        config_manager,
        args,
        **{
            "subgoals.source": args.source,
            "subgoals.runs": args.runs,
            "subgoals.k": args.k,
            "subgoals.partition": args.partition,
            "subgoals.eigen_method": args.eigen,
            "subgoals.workers": args.workers,
        },
    )
    s = config.subgoals
    logger.step(f"提取子目标: {config.map.path}，来源 {s.source}，{s.runs} 次重复")
    outcome = run_subgoal_experiment(config, seed=args.seed, output=args.output)
    print_outcome(outcome)
    logger.console.print((outcome.output_dir / PARTITION_FILE).read_text(encoding="utf-8"))
    return 0
