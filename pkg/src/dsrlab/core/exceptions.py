# -*- coding: utf-8 -*-
"""
自定义异常模块
"""


class DSRLabError(Exception):
    """DSR-Lab 基础异常"""

    def __init__(self, message: str, exit_code: int = 1):
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


# =============================================================================
# 配置
# =============================================================================


class ConfigError(DSRLabError):
    """配置相关异常"""


class ConfigParseError(ConfigError):
    """配置文件无法解析"""


class RangeError(ConfigError):
    """配置项取值越界，key 为出错的配置键"""

    def __init__(self, key: str, message: str = ""):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


# =============================================================================
# 地图与环境
# =============================================================================


class MapError(DSRLabError):
    """地图相关异常"""


class NonRectangularError(MapError):
    """地图行宽不一致"""


class UnknownCharError(MapError):
    """地图中出现未知字符"""


class NoGoalError(MapError):
    """地图中没有目标格"""


class UnreachableGoalError(MapError):
    """存在无法到达目标的格子"""


class NoStartError(UnreachableGoalError):
    """没有可用的出生格"""


class StepOnTerminalError(DSRLabError):
    """在终止状态上继续执行动作"""


# =============================================================================
# 数值计算
# =============================================================================


class DimensionMismatchError(DSRLabError):
    """向量/矩阵维度不一致"""


class ShapeMismatchError(DSRLabError):
    """张量形状不一致"""


class BadSpecError(DSRLabError):
    """网络结构描述无效"""


class BadActionError(DSRLabError):
    """动作编号无效"""


class EmptyBatchError(DSRLabError):
    """空的小批量"""


class SingularSystemError(DSRLabError):
    """线性方程组奇异"""


class ConvergenceFailureError(DSRLabError):
    """迭代未在上限内收敛"""


class DegenerateBandwidthError(DSRLabError):
    """RBF 带宽必须为正"""


class TooLargeError(DSRLabError):
    """问题规模超出穷举上限"""


# =============================================================================
# 智能体
# =============================================================================


class EmptyBufferError(DSRLabError):
    """回放缓冲区为空"""


class InsufficientDataError(DSRLabError):
    """回放缓冲区样本不足一个批次"""


class TopologyChangedError(DSRLabError):
    """地图布局与快照不一致"""


# =============================================================================
# 持久化与输出
# =============================================================================


class SnapshotError(DSRLabError):
    """快照读写异常"""


class VersionMismatchError(SnapshotError):
    """快照版本不匹配"""


class CorruptSnapshotError(SnapshotError):
    """快照内容损坏 (校验和不符或无法解析)"""


class MetricsError(DSRLabError):
    """指标文件读写异常"""


class BadArgsError(DSRLabError):
    """命令行参数错误"""

    def __init__(self, message: str):
        super().__init__(message, exit_code=2)
