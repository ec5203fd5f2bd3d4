# -*- coding: utf-8 -*-
"""
config 命令实现
"""

import dataclasses

import tomli_w
from rich.syntax import Syntax

from ...core import ConfigManager, get_logger
from ...core.config import read_config
from ...core.exceptions import ConfigError

logger = get_logger()

ACTIONS = {
    "show": "显示配置 (可只显示一节，如 train)",
    "get": "获取配置项",
    "set": "设置配置项并写回文件",
    "init": "写出默认配置文件",
    "check": "列出配置中所有越界的项",
}


def cmd_config(config_manager: ConfigManager, args) -> int:
    """配置管理"""
    handler = {
        "show": _show,
        "get": _get,
        "set": _set,
        "init": _init,
        "check": _check,
    }.get(args.cfg_action)
    if handler is None:
        logger.info_print("用法: dsrlab config [--config PATH] ACTION")
        for name, help_text in ACTIONS.items():
            logger.info_print(f"  {name:<8}{help_text}")
        return 0
    return handler(config_manager, args)


def _show(config_manager: ConfigManager, args) -> int:
    data = config_manager.config.to_dict()
    if args.section:
        if not isinstance(data.get(args.section), dict):
            logger.error_print(f"没有这一节: {args.section}")
            return 1
        data = {args.section: data[args.section]}
    text = tomli_w.dumps(data)
    logger.console.print(Syntax(text, "toml", theme="monokai", line_numbers=True))
    return 0


def _get(config_manager: ConfigManager, args) -> int:
    value = config_manager.get(args.key)
    if value is None:
        logger.error_print(f"配置项不存在: {args.key}")
        return 1
    if dataclasses.is_dataclass(value):
        value = dataclasses.asdict(value)
    logger.console.print(f"{args.key} = {value}", markup=False)
    return 0


def _set(config_manager: ConfigManager, args) -> int:
    config_manager.set(args.key, args.value)
    config_manager.save()
    logger.success(f"{args.key} = {config_manager.get(args.key)}")
    return 0


def _init(config_manager: ConfigManager, args) -> int:
    if config_manager.config_path.exists():
        logger.warning_print(f"配置文件已存在: {config_manager.config_path}")
        return 1
    config_manager.init_default_config()
    return 0


def _check(config_manager: ConfigManager, args) -> int:
    """与 load_config 不同，这里不在第一个错误处停下"""
    path = config_manager.config_path
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}")
    errors = read_config(path).validate()
    if not errors:
        logger.success(f"{path}: 配置有效")
        return 0
    logger.table(f"{path}", ["配置键", "问题"], errors, styles=("cyan", "red"))
    return 1
