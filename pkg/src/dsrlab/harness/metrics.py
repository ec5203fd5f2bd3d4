# -*- coding: utf-8 -*-
"""
指标文件
每类实验一个固定列的行类型，写成带表头的 CSV
"""

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, TypeVar

from ..core.exceptions import MetricsError


@dataclass(frozen=True)
class TrainingRow:
    episode: int
    steps: int
    reward: float
    eps: float
    loss_r: float
    loss_a: float
    loss_m: float


@dataclass(frozen=True)
class DistalRow:
    update: int
    steps: int
    q_start: float
    oracle: float
    rel_error: float


@dataclass(frozen=True)
class SubgoalRow:
    state_id: int
    row: int
    col: int
    boundary_count: int
    rank: int


Row = TypeVar("Row", TrainingRow, DistalRow, SubgoalRow)


def columns(row_type: type) -> list[str]:
    return [f.name for f in dataclasses.fields(row_type)]


def format_value(value) -> str:
    """浮点数用 repr (最短可回读表示，与区域设置无关)"""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics(rows: Sequence[Row], path: Path | str, row_type: Optional[type] = None) -> Path:
    """写出指标 CSV

    Args:
        rows: 同一类型的行
        path: 输出路径，父目录会自动创建
        row_type: 行类型；rows 为空时用来写表头

    Returns:
        写出的路径

    Raises:
        MetricsError: 行类型不一致或写入失败
    """
    path = Path(path)
    if row_type is None:
        if not rows:
            raise MetricsError("没有数据行时必须指定行类型")
        row_type = type(rows[0])
    if any(type(row) is not row_type for row in rows):
        raise MetricsError(f"所有行必须是 {row_type.__name__}")

    names = columns(row_type)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(names)
            for row in rows:
                writer.writerow([format_value(getattr(row, name)) for name in names])
    except OSError as e:
        raise MetricsError(f"无法写入指标文件 {path}: {e}") from e
    return path


def _parse_rows(lines: Iterable[list[str]], row_type: type, path: Path) -> list:
    fields = dataclasses.fields(row_type)
    out = []
    for n, record in enumerate(lines, start=2):
        if len(record) != len(fields):
            raise MetricsError(f"{path}:{n}: 应有 {len(fields)} 列，实际 {len(record)} 列")
        try:
            values = {
                f.name: int(v) if f.type is int else float(v) for f, v in zip(fields, record)
            }
        except ValueError as e:
            raise MetricsError(f"{path}:{n}: {e}") from e
        out.append(row_type(**values))
    return out


def read_metrics(path: Path | str, row_type: type) -> list:
    """读回 write_metrics 写出的文件

    Raises:
        MetricsError: 文件不存在、表头不符或数值无法解析
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != columns(row_type):
                raise MetricsError(f"{path}: 表头 {header} 与 {row_type.__name__} 不符")
            return _parse_rows(reader, row_type, path)
    except OSError as e:
        raise MetricsError(f"无法读取指标文件 {path}: {e}") from e
