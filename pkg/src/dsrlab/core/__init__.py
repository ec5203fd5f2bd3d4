# -*- coding: utf-8 -*-
"""
核心模块
"""

from importlib.metadata import version

from .config import (
    CLIConfig,
    ConfigManager,
    DistalConfig,
    EvalConfig,
    ExperimentConfig,
    MapConfig,
    NetworkConfig,
    SubgoalConfig,
    TrainConfig,
    expand_path,
    load_config,
)
from .const import CONFIG_DIR, CONFIG_FILE, DEFAULT_OUTPUT_DIR, LOG_LEVELS
from .exceptions import (
    ConfigError,
    ConfigParseError,
    DSRLabError,
    MapError,
    RangeError,
    SnapshotError,
)
from .logger import DSRLogger, get_logger


def get_version() -> str:
    """动态获取包版本"""
    try:
        return version("dsrlab")
    except Exception:
        return "builtin"


VERSION = get_version()

__all__ = [
    # config
    "CLIConfig",
    "ConfigManager",
    "DistalConfig",
    "EvalConfig",
    "ExperimentConfig",
    "MapConfig",
    "NetworkConfig",
    "SubgoalConfig",
    "TrainConfig",
    "expand_path",
    "load_config",
    # const
    "CONFIG_DIR",
    "CONFIG_FILE",
    "DEFAULT_OUTPUT_DIR",
    "LOG_LEVELS",
    "VERSION",
    # exceptions
    "ConfigError",
    "ConfigParseError",
    "DSRLabError",
    "MapError",
    "RangeError",
    "SnapshotError",
    # logger
    "DSRLogger",
    "get_logger",
]
