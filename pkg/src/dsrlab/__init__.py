# -*- coding: utf-8 -*-
"""
DSR-Lab: 深度后继表示的桌面实验台

子包:
    gridworld  网格世界地图与环境
    tabular    表格 SR 与规划基准
    nn         NumPy 网络、两阶段梯度与梯度检查
    agent      DSR 训练循环、对照 Q 网络与评估
    subgoals   SR 样本图上的归一化切分与子目标排名
    harness    指标、快照、对照检查与实验编排
"""

from .cli.main import main
from .core import VERSION as __version__

__all__ = ["__version__", "main"]
