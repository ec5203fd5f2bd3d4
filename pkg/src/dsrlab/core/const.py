"""
常量定义模块
"""

from pathlib import Path

# =============================================================================
# 路径常量
# =============================================================================

CONFIG_DIR = Path.home() / ".config" / "dsrlab"
CONFIG_FILE = CONFIG_DIR / "config.toml"
DEFAULT_OUTPUT_DIR = "./runs"

# =============================================================================
# 动作
# =============================================================================

ACTION_NAMES = ("North", "South", "East", "West")
N_ACTIONS = len(ACTION_NAMES)

# =============================================================================
# 地图字符
# =============================================================================

MAP_CHARS = {
    "#": "wall",
    ".": "empty",
    "W": "water",
    "G": "goal",
    "S": "start",
}

# =============================================================================
# 超参数默认值
# =============================================================================

DEFAULT_GAMMA = 0.99
DEFAULT_LEARNING_RATE = 2.5e-4
DEFAULT_MOMENTUM = 0.95
DEFAULT_EPSILON_START = 1.0
DEFAULT_EPSILON_END = 0.1
DEFAULT_EPSILON_ANNEAL_STEPS = 20000
DEFAULT_REWARD_DB_PROB = 0.2
DEFAULT_REWARD_SAMPLES_INIT = 4000
DEFAULT_REWARD_SAMPLES_DECAY = 0.5
DEFAULT_REWARD_SAMPLES_FLOOR = 1
DEFAULT_REPLAY_CAPACITY = 1_000_000
DEFAULT_TARGET_SYNC_INTERVAL = 500
DEFAULT_STEP_LIMIT = 500

DEFAULT_STEP_PENALTY = -0.5
DEFAULT_WATER_PENALTY = -1.0
DEFAULT_GOAL_REWARD = 1.0

# =============================================================================
# 选项
# =============================================================================

EPSILON_MODES = ["step", "episode"]
PHI_ACTIVATIONS = ["linear", "relu"]
TERMINAL_BOOTSTRAP_MODES = ["absorbing", "cut"]
SUCCESSOR_TARGETS = ["greedy", "uniform"]
PARTITION_METHODS = ["sweep", "sign"]
EIGEN_METHODS = ["dense", "power"]
SR_SOURCES = ["tabular", "learned"]
ACTION_MODES = ["taken", "averaged"]

# =============================================================================
# 日志级别
# =============================================================================

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# =============================================================================
# 快照
# =============================================================================

SNAPSHOT_FORMAT = "dsrlab.snapshot"
SNAPSHOT_VERSION = 1
