# -*- coding: utf-8 -*-
"""
oracle-check 命令实现
"""

from ...core import ConfigManager, get_logger
from ...harness.oracle import run_oracle_suites

logger = get_logger()


def cmd_oracle_check(config_manager: ConfigManager, args) -> int:
    """运行对照检查，全部通过时返回 0"""
    logger.step("运行对照检查...")
    results = run_oracle_suites(args.suite)

    logger.table(
        "对照检查",
        ["组", "检查项", "数值", "阈值", "结果"],
        [
            (
                r.suite,
                r.name,
                f"{r.value:.3e}",
                f"{r.threshold:.1e}",
                "[green]通过[/green]" if r.passed else "[red]失败[/red]",
            )
            for r in results
        ],
        styles=("cyan",),
    )

    failed = [r for r in results if not r.passed]
    if failed:
        logger.error_print(f"{len(failed)} 项检查未通过")
        return 1
    logger.success(f"全部 {len(results)} 项检查通过")
    return 0
