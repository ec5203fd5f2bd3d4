# -*- coding: utf-8 -*-
"""
实验报告
使用 Jinja2 渲染 summary.md，并把切分结果画成 ASCII 地图
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

try:
    from jinja2 import Environment, FileSystemLoader, select_autoescape
except ImportError:
    # 回退到简单字符串拼接
    Environment = None

from ..core.exceptions import DSRLabError
from ..core.logger import get_logger
from ..gridworld.maps import GridMap, Tile
from ..subgoals.sampling import state_id

logger = get_logger()

SUMMARY_TEMPLATE = "summary.md.jinja2"
LABEL_CHARS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass
class SummaryData:
    """summary.md 的模板数据"""

    experiment: str
    map_name: str
    seed: int
    settings: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    overlay: Optional[str] = None


def get_template_dir() -> Path:
    """获取模板目录路径"""
    try:
        import dsrlab as pkg

        template_dir = Path(pkg.__file__).parent / "templates"
        if template_dir.exists():
            return template_dir
    except Exception:
        pass

    # 源码树
    return Path(__file__).parent.parent / "templates"


def format_cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_summary(data: SummaryData) -> str:
    """渲染实验摘要

    Args:
        data: 模板数据

    Returns:
        Markdown 文本
    """
    if Environment is not None:
        env = Environment(
            loader=FileSystemLoader(get_template_dir()),
            autoescape=select_autoescape(),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )
        env.filters["cell"] = format_cell
        try:
            return env.get_template(SUMMARY_TEMPLATE).render(**data.__dict__)
        except Exception as e:
            logger.warning_print(f"Jinja2 渲染失败: {e}，使用回退方案")

    return _render_fallback(data)


def _render_fallback(data: SummaryData) -> str:
    """回退渲染方案"""
    lines = [
        f"# {data.experiment}",
        "",
        f"- 地图: `{data.map_name}`",
        f"- 种子: {data.seed}",
        "",
        "## 设置",
        "",
        "| 键 | 值 |",
        "| --- | --- |",
    ]
    lines += [f"| {k} | {format_cell(v)} |" for k, v in data.settings.items()]
    lines += ["", "## 结果", "", "| 指标 | 值 |", "| --- | --- |"]
    lines += [f"| {k} | {format_cell(v)} |" for k, v in data.results.items()]
    if data.overlay:
        lines += ["", "## 切分", "", "```", data.overlay.rstrip("\n"), "```"]
    if data.artifacts:
        lines += ["", "## 输出文件", ""]
        lines += [f"- `{name}`" for name in data.artifacts]
    return "\n".join(lines) + "\n"


def write_text(text: str, path: Path | str) -> Path:
    """写出 UTF-8 文本，父目录自动创建

    Raises:
        DSRLabError: 写入失败
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DSRLabError(f"无法写入 {path}: {e}") from e
    return path


def write_summary(data: SummaryData, path: Path | str) -> Path:
    return write_text(render_summary(data), path)


# =============================================================================
# ASCII 切分图
# =============================================================================


def partition_overlay(
    grid_map: GridMap,
    labels: dict[int, int],
    subgoals: Iterable[int] = (),
) -> str:
    """每格一个字符: 墙为 ``#``，子目标为 ``*``，其余为所属分段的字母

    Args:
        grid_map: 地图
        labels: 状态编号 → 分段编号 (从 0 开始)
        subgoals: 要标出的状态编号

    Returns:
        以换行结尾的多行文本；没有被采到的可通行格画作 ``?``
    """
    marked = set(subgoals)
    rows = []
    for r in range(grid_map.height):
        line = []
        for c in range(grid_map.width):
            sid = state_id(grid_map, (r, c))
            if grid_map.tile((r, c)) == Tile.WALL:
                line.append("#")
            elif sid in marked:
                line.append("*")
            elif sid in labels:
                line.append(LABEL_CHARS[labels[sid] % len(LABEL_CHARS)])
            else:
                line.append("?")
        rows.append("".join(line))
    return "\n".join(rows) + "\n"


def labels_by_state(state_ids: Iterable[int], segment_labels: Iterable[int]) -> dict[int, int]:
    """把逐节点的分段编号换成状态编号索引；同一状态出现多次时取第一次"""
    out: dict[int, int] = {}
    for sid, label in zip(state_ids, segment_labels):
        out.setdefault(int(sid), int(label))
    return out
