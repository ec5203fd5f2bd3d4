# -*- coding: utf-8 -*-
import logging
from types import SimpleNamespace

import pytest

from dsrlab.core.logger import get_logger, resolve_level


@pytest.fixture
def logger():
    log = get_logger()
    yield log
    log.setup()


@pytest.mark.parametrize(
    "level, verbose, quiet, expected",
    [
        ("INFO", False, False, logging.INFO),
        ("warning", False, False, logging.WARNING),
        ("nonsense", False, False, logging.INFO),
        ("INFO", True, False, logging.DEBUG),
        ("DEBUG", True, True, logging.ERROR),
    ],
)
def test_resolve_level(level, verbose, quiet, expected):
    assert resolve_level(level, verbose, quiet) == expected


def test_singleton():
    assert get_logger() is get_logger()


def test_file_handler_records_debug(logger, tmp_path):
    path = tmp_path / "logs" / "run.log"
    logger.setup(log_level="ERROR", log_file=path)
    logger.debug("第 %d 回合", 3)
    for handler in logger.logger.handlers:
        handler.flush()
    text = path.read_text(encoding="utf-8")
    assert "| DEBUG | 第 3 回合" in text


def test_setup_replaces_handlers(logger, tmp_path):
    logger.setup(log_file=tmp_path / "a.log")
    logger.setup()
    assert len(logger.logger.handlers) == 1


def test_console_output_is_literal(logger, capsys):
    logger.error_print("shape [3, 4]")
    logger.step("[bold]x[/bold]")
    out = capsys.readouterr().out
    assert "C: shape [3, 4]" in out
    assert "> [bold]x[/bold]" in out


def test_table(logger, capsys):
    logger.table("结果", ["指标", "值"], [("mean", "0.5")])
    out = capsys.readouterr().out
    assert "mean" in out
    assert "0.5" in out


def test_progress_quiet_is_noop(logger):
    logger.setup(quiet=True)
    with logger.progress(10, "回合") as advance:
        advance(SimpleNamespace(episode=0, reward=1.0))


def test_progress_accepts_rows(logger):
    with logger.progress(2, "回合") as advance:
        advance(SimpleNamespace(episode=0, reward=-3.5))
        advance(SimpleNamespace(episode=1, reward=0.5))
