# -*- coding: utf-8 -*-
"""
train / baseline 命令实现
"""

from ...core import ConfigManager, get_logger
from ...harness.experiments import run_train_experiment
from .common import experiment_config, print_outcome

logger = get_logger()


def _run(config_manager: ConfigManager, args, baseline: bool) -> int:
    config = experiment_config(
        config_manager,
        args,
        **{"train.total_episodes": args.episodes, "train.max_env_steps": args.max_steps},
    )
    what = "对照 Q 网络" if baseline else "DSR"
    if args.resume:
        logger.step(f"从 {args.resume} 续跑 {what} 训练...")
    else:
        logger.step(f"训练 {what}: {config.map.path}，{config.train.total_episodes} 回合")
    with logger.progress(config.train.total_episodes, "回合") as advance:
        outcome = run_train_experiment(
            config,
            seed=args.seed,
            output=args.output,
            resume=args.resume,
            baseline=baseline,
            episode_callback=advance,
        )
    print_outcome(outcome)
    return 0


def cmd_train(config_manager: ConfigManager, args) -> int:
    """训练 DSR"""
    return _run(config_manager, args, baseline=False)


def cmd_baseline(config_manager: ConfigManager, args) -> int:
    """训练对照 Q 网络"""
    return _run(config_manager, args, baseline=True)
