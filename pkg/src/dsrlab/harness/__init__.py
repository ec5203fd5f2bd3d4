# -*- coding: utf-8 -*-
"""
实验编排模块
指标文件、快照持久化、对照检查、报告与实验入口

agent 在导入时依赖 metrics，这里按需加载其余子模块。
"""

from importlib import import_module

_EXPORTS = {
    "DistalRow": "metrics",
    "SubgoalRow": "metrics",
    "TrainingRow": "metrics",
    "read_metrics": "metrics",
    "write_metrics": "metrics",
    "load_snapshot": "persistence",
    "save_snapshot": "persistence",
    "OracleResult": "oracle",
    "run_oracle_suites": "oracle",
    "SummaryData": "report",
    "partition_overlay": "report",
    "render_summary": "report",
    "ExperimentOutcome": "experiments",
    "build_map": "experiments",
    "run_distal_experiment": "experiments",
    "run_eval_experiment": "experiments",
    "run_subgoal_experiment": "experiments",
    "run_train_experiment": "experiments",
}


def __getattr__(name: str):
    if name in _EXPORTS:
        return getattr(import_module(f".{_EXPORTS[name]}", __name__), name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = sorted(_EXPORTS)
