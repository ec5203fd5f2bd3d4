# -*- coding: utf-8 -*-
"""
配置管理模块
处理 TOML 实验配置文件读写与校验
"""

import dataclasses
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    try:
        import tomli as tomllib
    except ImportError:
        tomllib = None

try:
    import tomli_w
except ImportError:
    tomli_w = None

from .const import (
    ACTION_MODES,
    CONFIG_FILE,
    DEFAULT_EPSILON_ANNEAL_STEPS,
    DEFAULT_EPSILON_END,
    DEFAULT_EPSILON_START,
    DEFAULT_GAMMA,
    DEFAULT_GOAL_REWARD,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MOMENTUM,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_REPLAY_CAPACITY,
    DEFAULT_REWARD_DB_PROB,
    DEFAULT_REWARD_SAMPLES_DECAY,
    DEFAULT_REWARD_SAMPLES_FLOOR,
    DEFAULT_REWARD_SAMPLES_INIT,
    DEFAULT_STEP_LIMIT,
    DEFAULT_STEP_PENALTY,
    DEFAULT_TARGET_SYNC_INTERVAL,
    DEFAULT_WATER_PENALTY,
    EIGEN_METHODS,
    EPSILON_MODES,
    LOG_LEVELS,
    PARTITION_METHODS,
    PHI_ACTIVATIONS,
    SR_SOURCES,
    SUCCESSOR_TARGETS,
    TERMINAL_BOOTSTRAP_MODES,
)
from .exceptions import ConfigError, ConfigParseError, RangeError
from .logger import get_logger

logger = get_logger()

BUILTIN_PREFIX = "builtin:"


def expand_path(path: str) -> Path:
    return Path(os.path.expandvars(os.path.expanduser(path)))


@dataclass
class CLIConfig:
    """CLI 配置"""

    verbose: bool = False
    quiet: bool = False
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @property
    def expanded_log_file(self) -> Optional[Path]:
        return expand_path(self.log_file) if self.log_file else None


@dataclass
class MapConfig:
    """地图配置

    path 可以是 ASCII 地图文件路径，也可以是 ``builtin:<name>``。
    """

    path: str = "builtin:test_maze"
    step_penalty: float = DEFAULT_STEP_PENALTY
    water_penalty: float = DEFAULT_WATER_PENALTY
    goal_reward: float = DEFAULT_GOAL_REWARD

    @property
    def is_builtin(self) -> bool:
        return self.path.startswith(BUILTIN_PREFIX)


@dataclass
class NetworkConfig:
    """网络结构配置"""

    hidden: list[int] = field(default_factory=lambda: [64, 64])
    feature_dim: int = 64
    phi_activation: str = "linear"
    terminal_bootstrap: str = "absorbing"
    reward_weight: float = 1.0
    recon_weight: float = 1.0
    normalize_input: bool = True


@dataclass
class TrainConfig:
    """训练配置"""

    gamma: float = DEFAULT_GAMMA
    lr: float = DEFAULT_LEARNING_RATE
    momentum: float = DEFAULT_MOMENTUM
    batch_size: int = 32
    target_sync_interval: int = DEFAULT_TARGET_SYNC_INTERVAL
    reward_db_prob: float = DEFAULT_REWARD_DB_PROB
    reward_samples_init: int = DEFAULT_REWARD_SAMPLES_INIT
    reward_samples_decay: float = DEFAULT_REWARD_SAMPLES_DECAY
    reward_samples_floor: int = DEFAULT_REWARD_SAMPLES_FLOOR
    replay_capacity: int = DEFAULT_REPLAY_CAPACITY
    step_limit: int = DEFAULT_STEP_LIMIT
    total_episodes: int = 500
    max_env_steps: int = 0
    epsilon_start: float = DEFAULT_EPSILON_START
    epsilon_end: float = DEFAULT_EPSILON_END
    epsilon_anneal_steps: int = DEFAULT_EPSILON_ANNEAL_STEPS
    epsilon_mode: str = "step"
    successor_target: str = "greedy"


@dataclass
class EvalConfig:
    """评估配置"""

    episodes: int = 100
    epsilon: float = 0.05


@dataclass
class DistalConfig:
    """远端奖励变化实验配置"""

    goal_reward: float = 3.0
    max_env_steps: int = 20000
    tolerance: float = 0.05
    lr: float = 0.005
    momentum: float = 0.9
    batch_size: int = 32
    baseline_snapshot: Optional[str] = None


@dataclass
class SubgoalConfig:
    """子目标提取配置

    sigma 为 0 时使用样本两两距离的中位数。
    """

    source: str = "tabular"
    gamma: float = 0.95
    sigma: float = 0.0
    k: int = 3
    runs: int = 20
    n_samples: int = 2000
    dedupe: bool = True
    action_mode: str = "taken"
    partition: str = "sweep"
    eigen_method: str = "dense"
    segments: int = 2
    max_ncut: float = 0.5
    workers: int = 1
    train_episodes: int = 200


@dataclass
class ExperimentConfig:
    """DSR-Lab 实验总配置"""

    seed: int = 0
    output_dir: str = DEFAULT_OUTPUT_DIR
    cli: CLIConfig = field(default_factory=CLIConfig)
    map: MapConfig = field(default_factory=MapConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    distal: DistalConfig = field(default_factory=DistalConfig)
    subgoals: SubgoalConfig = field(default_factory=SubgoalConfig)

    @property
    def expanded_output_dir(self) -> Path:
        return expand_path(self.output_dir)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """从字典创建配置对象

        顶层出现的训练键 (如 ``gamma = 0.9``) 会并入 [train]。
        """
        config = cls()
        sections = {
            "cli": CLIConfig,
            "map": MapConfig,
            "network": NetworkConfig,
            "train": TrainConfig,
            "eval": EvalConfig,
            "distal": DistalConfig,
            "subgoals": SubgoalConfig,
        }

        train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
        flat_train = {k: v for k, v in data.items() if k in train_fields}
        if flat_train:
            data = dict(data)
            data["train"] = {**flat_train, **data.get("train", {})}

        for name, section_cls in sections.items():
            if name in data:
                if not isinstance(data[name], dict):
                    raise ConfigParseError(f"[{name}] 必须是表")
                setattr(config, name, section_cls(**_filter_keys(section_cls, data[name])))

        if "seed" in data:
            config.seed = data["seed"]
        if "output_dir" in data:
            config.output_dir = data["output_dir"]
        return config

    def to_dict(self) -> dict[str, Any]:
        """TOML 没有空值，值为 None 的键直接省略"""
        return dataclasses.asdict(
            self, dict_factory=lambda items: {k: v for k, v in items if v is not None}
        )

    def validate(self) -> list[tuple[str, str]]:
        """验证配置，返回 (键, 错误信息) 列表"""
        errors: list[tuple[str, str]] = []

        def check(ok: bool, key: str, message: str):
            if not ok:
                errors.append((key, message))

        check(isinstance(self.seed, int) and self.seed >= 0, "seed", "必须是非负整数")
        check(self.cli.log_level in LOG_LEVELS, "cli.log_level", f"无效的日志级别: {self.cli.log_level}")

        t = self.train
        check(0.0 <= t.gamma < 1.0, "train.gamma", "gamma 必须在 [0, 1) 内")
        check(t.lr >= 0.0, "train.lr", "学习率不能为负")
        check(0.0 <= t.momentum < 1.0, "train.momentum", "momentum 必须在 [0, 1) 内")
        check(t.batch_size >= 1, "train.batch_size", "batch_size 至少为 1")
        check(t.target_sync_interval >= 1, "train.target_sync_interval", "至少为 1")
        check(0.0 <= t.reward_db_prob <= 1.0, "train.reward_db_prob", "必须在 [0, 1] 内")
        check(t.reward_samples_init >= 1, "train.reward_samples_init", "至少为 1")
        check(0.0 < t.reward_samples_decay <= 1.0, "train.reward_samples_decay", "必须在 (0, 1] 内")
        check(t.reward_samples_floor >= 1, "train.reward_samples_floor", "至少为 1")
        check(t.replay_capacity >= 1, "train.replay_capacity", "至少为 1")
        check(t.step_limit >= 1, "train.step_limit", "至少为 1")
        check(t.total_episodes >= 0, "train.total_episodes", "不能为负")
        check(t.max_env_steps >= 0, "train.max_env_steps", "不能为负 (0 表示不限制)")
        check(0.0 <= t.epsilon_start <= 1.0, "train.epsilon_start", "必须在 [0, 1] 内")
        check(0.0 <= t.epsilon_end <= t.epsilon_start, "train.epsilon_end", "必须满足 0 <= end <= start")
        check(t.epsilon_anneal_steps >= 0, "train.epsilon_anneal_steps", "不能为负")
        check(t.epsilon_mode in EPSILON_MODES, "train.epsilon_mode", f"可选值: {EPSILON_MODES}")
        check(
            t.successor_target in SUCCESSOR_TARGETS,
            "train.successor_target",
            f"可选值: {SUCCESSOR_TARGETS}",
        )

        n = self.network
        check(len(n.hidden) >= 1 and all(h >= 1 for h in n.hidden), "network.hidden", "隐藏层宽度至少为 1")
        check(n.feature_dim >= 1, "network.feature_dim", "特征维度至少为 1")
        check(n.phi_activation in PHI_ACTIVATIONS, "network.phi_activation", f"可选值: {PHI_ACTIVATIONS}")
        check(
            n.terminal_bootstrap in TERMINAL_BOOTSTRAP_MODES,
            "network.terminal_bootstrap",
            f"可选值: {TERMINAL_BOOTSTRAP_MODES}",
        )
        check(n.reward_weight >= 0.0, "network.reward_weight", "不能为负")
        check(n.recon_weight >= 0.0, "network.recon_weight", "不能为负")

        check(self.eval.episodes >= 1, "eval.episodes", "至少为 1")
        check(0.0 <= self.eval.epsilon <= 1.0, "eval.epsilon", "必须在 [0, 1] 内")

        d = self.distal
        check(d.tolerance > 0.0, "distal.tolerance", "必须为正")
        check(d.max_env_steps >= 1, "distal.max_env_steps", "至少为 1")
        check(d.lr >= 0.0, "distal.lr", "学习率不能为负")
        check(0.0 <= d.momentum < 1.0, "distal.momentum", "momentum 必须在 [0, 1) 内")
        check(d.batch_size >= 1, "distal.batch_size", "至少为 1")

        s = self.subgoals
        check(s.source in SR_SOURCES, "subgoals.source", f"可选值: {SR_SOURCES}")
        check(0.0 <= s.gamma < 1.0, "subgoals.gamma", "gamma 必须在 [0, 1) 内")
        check(s.sigma >= 0.0, "subgoals.sigma", "不能为负 (0 表示中位数启发式)")
        check(s.k >= 1, "subgoals.k", "至少为 1")
        check(s.runs >= 1, "subgoals.runs", "至少为 1")
        check(s.n_samples >= 2, "subgoals.n_samples", "至少为 2")
        check(s.action_mode in ACTION_MODES, "subgoals.action_mode", f"可选值: {ACTION_MODES}")
        check(s.partition in PARTITION_METHODS, "subgoals.partition", f"可选值: {PARTITION_METHODS}")
        check(s.eigen_method in EIGEN_METHODS, "subgoals.eigen_method", f"可选值: {EIGEN_METHODS}")
        check(s.segments >= 2, "subgoals.segments", "至少为 2")
        check(s.max_ncut > 0.0, "subgoals.max_ncut", "必须为正")
        check(s.workers >= 1, "subgoals.workers", "至少为 1")
        check(s.train_episodes >= 1, "subgoals.train_episodes", "至少为 1")

        if not self.map.is_builtin:
            check(expand_path(self.map.path).exists(), "map.path", f"地图文件不存在: {self.map.path}")
        if d.baseline_snapshot:
            check(
                expand_path(d.baseline_snapshot).exists(),
                "distal.baseline_snapshot",
                f"快照文件不存在: {d.baseline_snapshot}",
            )

        return errors


def _filter_keys(dataclass_cls: type, data: dict[str, Any]) -> dict[str, Any]:
    known = {f.name for f in dataclasses.fields(dataclass_cls)}
    kept = {k: v for k, v in data.items() if k in known}
    if len(kept) < len(data):
        logger.debug(f"{dataclass_cls.__name__} 忽略未知键: {sorted(set(data) - known)}")
    return kept


def read_toml(path: Path) -> dict[str, Any]:
    if tomllib is None:
        raise ConfigError(
            "缺少 TOML 解析库。\n"
            f"当前 Python 版本: {sys.version_info.major}.{sys.version_info.minor}\n"
            "请安装 tomli: pip install tomli"
        )
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"读取配置文件失败: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigParseError(f"配置文件解析失败: {path}: {e}") from e


def resolve_relative_paths(config: ExperimentConfig, base: Path) -> None:
    """地图与快照的相对路径按 base 目录解析 (原地修改)"""
    if not config.map.is_builtin and not expand_path(config.map.path).is_absolute():
        config.map.path = str(base / config.map.path)
    snap = config.distal.baseline_snapshot
    if snap and not expand_path(snap).is_absolute():
        config.distal.baseline_snapshot = str(base / snap)


def read_config(path: Path | str) -> ExperimentConfig:
    """读取配置文件并解析相对路径，不做取值校验

    Raises:
        ConfigParseError: 文件不是合法的 TOML，或结构不对
    """
    path = expand_path(str(path))
    try:
        config = ExperimentConfig.from_dict(read_toml(path))
    except TypeError as e:
        raise ConfigParseError(f"配置结构无效: {e}") from e
    resolve_relative_paths(config, path.parent)
    logger.debug(f"配置已加载: {path}")
    return config


def load_config(path: Optional[Path | str] = None) -> ExperimentConfig:
    """加载并校验实验配置

    Args:
        path: 配置文件路径，None 表示全部使用默认值

    Returns:
        填充默认值并通过校验的配置

    Raises:
        ConfigParseError: 文件不是合法的 TOML
        RangeError: 某个配置项越界，携带出错的键
    """
    config = ExperimentConfig() if path is None else read_config(path)

    errors = config.validate()
    if errors:
        key, message = errors[0]
        raise RangeError(key, message)
    return config


class ConfigManager:
    """CLI 使用的配置文件句柄

    键用点号路径表示，例如 ``train.gamma``；只有一段的键指向整节。
    """

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path or CONFIG_FILE
        self._config: Optional[ExperimentConfig] = None

    @property
    def config(self) -> ExperimentConfig:
        if self._config is None:
            self.load()
        return self._config

    def load(self, force: bool = False) -> ExperimentConfig:
        """读取 config_path；文件缺失时退回默认实验配置"""
        if force or self._config is None:
            if self.config_path.exists():
                self._config = load_config(self.config_path)
            else:
                logger.debug(f"未找到 {self.config_path}，使用默认实验配置")
                self._config = ExperimentConfig()
        return self._config

    def save(self, config: Optional[ExperimentConfig] = None) -> None:
        """校验后写回 config_path

        Raises:
            ConfigError: 没有已加载的配置、某项越界或写入失败
        """
        target = config if config is not None else self._config
        if target is None:
            raise ConfigError("尚未加载任何实验配置")
        if tomli_w is None:
            raise ConfigError("缺少 TOML 写入库。\n请安装: pip install tomli-w")

        problems = target.validate()
        if problems:
            lines = "\n".join(f"  {key}: {message}" for key, message in problems)
            raise ConfigError(f"实验配置有 {len(problems)} 处越界，未写入:\n{lines}")

        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            self.config_path.write_text(tomli_w.dumps(target.to_dict()), encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"无法写入 {self.config_path}: {e}") from e
        self._config = target
        logger.info(f"实验配置已写入 {self.config_path}")

    def _locate(self, key: str) -> tuple[Any, str]:
        """返回 (所属对象, 字段名)；路径上的每一段都必须是数据类字段"""
        owner: Any = self.config
        *sections, name = key.split(".")
        for section in sections:
            if not _has_field(owner, section):
                raise ConfigError(f"无效的配置键: {key}")
            owner = getattr(owner, section)
        if not _has_field(owner, name):
            raise ConfigError(f"无效的配置键: {key}")
        return owner, name

    def get(self, key: str, default: Any = None) -> Any:
        try:
            owner, name = self._locate(key)
        except ConfigError:
            return default
        return getattr(owner, name)

    def set(self, key: str, value: Any) -> None:
        """设置一项，字符串按该字段当前值的类型转换

        Raises:
            ConfigError: 键不存在
            RangeError: 无法转换，或新值越界 (此时保留原值)
        """
        owner, name = self._locate(key)
        previous = getattr(owner, name)
        if isinstance(value, str) and previous is not None and not isinstance(previous, str):
            value = _coerce(value, previous, key)
        setattr(owner, name, value)

        for bad_key, message in self.config.validate():
            if bad_key == key:
                setattr(owner, name, previous)
                raise RangeError(key, message)

    def init_default_config(self) -> None:
        self.save(ExperimentConfig())
        logger.success(f"默认配置已创建: {self.config_path}")


def _has_field(obj: Any, name: str) -> bool:
    return dataclasses.is_dataclass(obj) and name in {f.name for f in dataclasses.fields(obj)}


def _coerce(raw: str, current: Any, key: str) -> Any:
    try:
        if isinstance(current, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, list):
            return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError as e:
        raise RangeError(key, f"无法转换取值: {raw}") from e
    return raw
