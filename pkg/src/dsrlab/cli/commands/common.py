# -*- coding: utf-8 -*-
"""
命令共用的配置覆盖与结果表格
"""

import dataclasses
from typing import Any

from ...core import ConfigManager, ExperimentConfig, get_logger
from ...core.config import BUILTIN_PREFIX
from ...core.exceptions import ConfigError, RangeError
from ...gridworld.maps import BUILTIN_MAPS
from ...harness.report import format_cell

logger = get_logger()


def experiment_config(config_manager: ConfigManager, args, **overrides: Any) -> ExperimentConfig:
    """读取配置并应用命令行覆盖

    Args:
        config_manager: 配置管理器
        args: 解析后的参数，读取其中的 ``--config`` 与 ``--map``
        **overrides: ``section.key`` 形式的覆盖值，None 表示不覆盖

    Raises:
        ConfigError: 指定的配置文件不存在
        RangeError: 覆盖后的配置越界
    """
    if getattr(args, "config", None) and not config_manager.config_path.exists():
        raise ConfigError(f"配置文件不存在: {config_manager.config_path}")
    config = config_manager.config

    if getattr(args, "map", None):
        name = args.map
        overrides["map.path"] = BUILTIN_PREFIX + name if name in BUILTIN_MAPS else name
    for key, value in overrides.items():
        if value is None:
            continue
        section, name = key.split(".")
        updated = dataclasses.replace(getattr(config, section), **{name: value})
        config = dataclasses.replace(config, **{section: updated})

    errors = config.validate()
    if errors:
        raise RangeError(*errors[0])
    return config


def print_results(title: str, results: dict[str, Any]) -> None:
    logger.table(title, ["指标", "值"], [(key, format_cell(value)) for key, value in results.items()])


def print_outcome(outcome) -> None:
    print_results(f"{outcome.name} 结果", outcome.results)
    for path in outcome.files:
        logger.verbose(str(path))
    logger.success(f"输出目录: {outcome.output_dir}")
