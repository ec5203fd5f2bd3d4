# -*- coding: utf-8 -*-
"""
日志模块
库代码通过 debug/info 记录进度；带前缀的控制台输出、表格与进度条只在 CLI 层使用
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text

LOGGER_NAME = "dsrlab"
FILE_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"


def resolve_level(log_level: str = "INFO", verbose: bool = False, quiet: bool = False) -> int:
    """quiet 优先于 verbose；无法识别的级别名按 INFO 处理"""
    if quiet:
        return logging.ERROR
    if verbose:
        return logging.DEBUG
    level = logging.getLevelName(log_level.upper())
    return level if isinstance(level, int) else logging.INFO


class DSRLogger:
    """DSR-Lab 日志管理器 (进程内单例)"""

    _instance: Optional["DSRLogger"] = None

    def __new__(cls):
        if cls._instance is None:
            obj = super().__new__(cls)
            obj._console = Console(highlight=False)
            obj._logger = logging.getLogger(LOGGER_NAME)
            obj._logger.setLevel(logging.DEBUG)
            obj._logger.propagate = False
            obj._quiet = False
            cls._instance = obj
        return cls._instance

    @property
    def logger(self) -> logging.Logger:
        return self._logger

    @property
    def console(self) -> Console:
        return self._console

    def setup(
        self,
        log_level: str = "INFO",
        log_file: Optional[Path] = None,
        verbose: bool = False,
        quiet: bool = False,
    ) -> None:
        """重新安装处理器

        Args:
            log_level: 控制台日志级别
            log_file: 额外写入的日志文件，始终记录 DEBUG
            verbose: 控制台输出 DEBUG
            quiet: 只输出错误，同时关闭进度条
        """
        for handler in list(self._logger.handlers):
            self._logger.removeHandler(handler)
            handler.close()
        self._quiet = quiet

        console_handler = RichHandler(
            console=self._console,
            show_path=False,
            rich_tracebacks=True,
            markup=False,
        )
        console_handler.setLevel(resolve_level(log_level, verbose, quiet))
        console_handler.setFormatter(logging.Formatter("%(message)s"))
        self._logger.addHandler(console_handler)

        if log_file:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
            self._logger.addHandler(file_handler)

    # -------------------------------------------------------------------------
    # 记录
    # -------------------------------------------------------------------------

    def debug(self, msg: str, *args: Any) -> None:
        self._logger.debug(msg, *args)

    def info(self, msg: str, *args: Any) -> None:
        self._logger.info(msg, *args)

    def warning(self, msg: str, *args: Any) -> None:
        self._logger.warning(msg, *args)

    def error(self, msg: str, *args: Any) -> None:
        self._logger.error(msg, *args)

    # -------------------------------------------------------------------------
    # 控制台输出
    # -------------------------------------------------------------------------

    def _emit(self, prefix: str, prefix_style: str, msg: Any, body_style: str = "") -> None:
        # 消息按纯文本输出，路径与数组表示里的方括号不会被当成标记
        text = Text(prefix, style=prefix_style)
        text.append(str(msg), style=body_style)
        self._console.print(text)

    def success(self, msg: str) -> None:
        self._emit("S: ", "bold green", msg)

    def info_print(self, msg: str) -> None:
        self._emit("I: ", "cyan", msg)

    def warning_print(self, msg: str) -> None:
        self._emit("W: ", "bold yellow", msg)

    def error_print(self, msg: str) -> None:
        self._emit("C: ", "bold red", msg)

    def step(self, msg: str) -> None:
        self._emit("> ", "bold blue", msg)

    def verbose(self, msg: str, indent: int = 2) -> None:
        """灰色缩进的补充信息"""
        self._emit("  " * indent, "dim", msg, body_style="dim")

    def table(
        self,
        title: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[str]],
        styles: Sequence[str] = ("cyan", "green"),
    ) -> None:
        """输出表格；styles 依次用于前几列"""
        table = Table(title=title)
        for i, name in enumerate(columns):
            table.add_column(name, style=styles[i] if i < len(styles) else None)
        for row in rows:
            table.add_row(*row)
        self._console.print(table)

    @contextmanager
    def progress(self, total: int, description: str) -> Iterator[Callable[[Any], None]]:
        """回合进度条

        yield 一个回调，接收带 ``episode`` 与 ``reward`` 字段的指标行。
        静默模式或 total 为 0 时回调什么也不做。
        """
        if self._quiet or total <= 0:
            yield lambda row: None
            return

        bar = Progress(
            TextColumn("[bold blue]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("reward {task.fields[reward]}"),
            TimeElapsedColumn(),
            console=self._console,
            transient=True,
        )
        with bar:
            task = bar.add_task(description, total=total, reward="-")

            def advance(row: Any) -> None:
                bar.update(task, completed=row.episode + 1, reward=f"{row.reward:.3f}")

            yield advance


get_logger = DSRLogger
