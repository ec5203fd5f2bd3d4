# -*- coding: utf-8 -*-
"""
实验编排
从配置构建地图与 SR 来源，运行一次实验并把指标、快照、摘要写入输出目录
"""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from ..agent.baseline import baseline_distal_retrain, baseline_q_training
from ..agent.dsr import distal_reward_adapt, run_training, train_random_policy_sr
from ..agent.evaluation import DSRActor, QNetActor, RandomActor, TabularActor, evaluate_policy
from ..agent.snapshot import AgentSnapshot
from ..core.config import ExperimentConfig, expand_path
from ..core.exceptions import SnapshotError
from ..core.logger import get_logger
from ..gridworld.env import build_transition_model
from ..gridworld.maps import GridMap, load_map
from ..subgoals.extract import SubgoalRanking, aggregate_topk
from ..subgoals.sampling import LearnedSR, SRSource, TabularSR
from ..subgoals.spectral import recursive_partition
from ..tabular.planning import optimal_return, value_iteration
from ..tabular.sr import export_sr_csv
from .metrics import DistalRow, SubgoalRow, TrainingRow, write_metrics
from .persistence import load_snapshot, save_snapshot
from .report import SummaryData, labels_by_state, partition_overlay, write_summary, write_text

logger = get_logger()

METRICS_FILE = "metrics.csv"
DISTAL_FILE = "distal.csv"
BASELINE_DISTAL_FILE = "baseline_distal.csv"
SUBGOALS_FILE = "subgoals.csv"
SNAPSHOT_FILE = "snapshot.json"
SR_FILE = "sr.csv"
SUMMARY_FILE = "summary.md"
PARTITION_FILE = "partition.txt"


@dataclass
class ExperimentOutcome:
    """一次实验的输出目录、写出的文件与摘要指标"""

    name: str
    output_dir: Path
    files: list[Path] = field(default_factory=list)
    results: dict[str, Any] = field(default_factory=dict)


# =============================================================================
# 从配置构建
# =============================================================================


def build_map(config: ExperimentConfig, source: Optional[str] = None) -> GridMap:
    """按 [map] 的奖励参数与 train.step_limit 加载地图"""
    m = config.map
    return load_map(
        source or m.path,
        step_penalty=m.step_penalty,
        water_penalty=m.water_penalty,
        goal_reward=m.goal_reward,
        step_limit=config.train.step_limit,
    )


def with_episodes(config: ExperimentConfig, episodes: Optional[int]) -> ExperimentConfig:
    if episodes is None:
        return config
    return dataclasses.replace(
        config, train=dataclasses.replace(config.train, total_episodes=episodes)
    )


def subgoal_sigma(config: ExperimentConfig) -> Optional[float]:
    """配置中的 0 表示使用中位数启发式"""
    return config.subgoals.sigma or None


def output_dir_for(config: ExperimentConfig, name: str, seed: int, output: Optional[str]) -> Path:
    if output:
        return expand_path(output)
    return config.expanded_output_dir / f"{name}-seed{seed}"


def subgoal_source(
    grid_map: GridMap, config: ExperimentConfig, seed: int
) -> tuple[SRSource, Optional[AgentSnapshot]]:
    """tabular 直接取闭式 SR；learned 先在随机策略下训练 DSR

    Returns:
        (SR 来源, learned 模式下训练得到的快照)
    """
    if config.subgoals.source == "tabular":
        return TabularSR.from_map(grid_map, config.subgoals.gamma), None
    logger.info(f"随机策略下训练 {config.subgoals.train_episodes} 回合以获得 SR")
    result = train_random_policy_sr(grid_map, config, seed)
    return LearnedSR(result.params, grid_map), result.snapshot


def _settings(config: ExperimentConfig, *sections: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in sections:
        for key, value in dataclasses.asdict(getattr(config, name)).items():
            out[f"{name}.{key}"] = value
    return out


def _finish(
    outcome: ExperimentOutcome,
    grid_map: GridMap,
    seed: int,
    settings: dict[str, Any],
    overlay: Optional[str] = None,
) -> ExperimentOutcome:
    summary_path = outcome.output_dir / SUMMARY_FILE
    data = SummaryData(
        experiment=outcome.name,
        map_name=grid_map.name,
        seed=seed,
        settings=settings,
        results=outcome.results,
        artifacts=[p.name for p in outcome.files] + [SUMMARY_FILE],
        overlay=overlay,
    )
    outcome.files.append(write_summary(data, summary_path))
    logger.info(f"实验输出已写入: {outcome.output_dir}")
    return outcome


def _final_window(rows: list[TrainingRow], window: int = 100) -> Optional[float]:
    if not rows:
        return None
    tail = rows[-window:]
    return sum(r.reward for r in tail) / len(tail)


# =============================================================================
# 实验
# =============================================================================


def run_train_experiment(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    output: Optional[str] = None,
    episodes: Optional[int] = None,
    resume: Optional[str] = None,
    baseline: bool = False,
    episode_callback: Optional[Callable[[TrainingRow], None]] = None,
) -> ExperimentOutcome:
    """训练 DSR (或对照 Q 网络)，写出 metrics.csv、snapshot.json、summary.md

    Args:
        config: 实验配置
        seed: 种子，缺省为 config.seed；续跑时以快照为准
        output: 输出目录，缺省为 output_dir/<实验名>-seed<种子>
        episodes: 覆盖 train.total_episodes
        resume: 从该快照文件续跑
        baseline: 训练对照 Q 网络
        episode_callback: 每个回合结束时收到该回合的指标行
    """
    config = with_episodes(config, episodes)
    snapshot = load_snapshot(expand_path(resume)) if resume else None
    seed = snapshot.seed if snapshot else (config.seed if seed is None else seed)
    grid_map = build_map(config)
    name = "baseline" if baseline else "train"
    outcome = ExperimentOutcome(name, output_dir_for(config, name, seed, output))

    trainer = baseline_q_training if baseline else run_training
    result = trainer(
        grid_map, config, seed=seed, resume=snapshot, episode_callback=episode_callback
    )

    outcome.files.append(
        write_metrics(result.rows, outcome.output_dir / METRICS_FILE, TrainingRow)
    )
    outcome.files.append(save_snapshot(result.snapshot, outcome.output_dir / SNAPSHOT_FILE))
    model = build_transition_model(grid_map)
    outcome.results = {
        "episodes": result.snapshot.episode,
        "env_steps": result.snapshot.global_step,
        "updates": result.snapshot.updates,
        "mean_reward_last_100": _final_window(result.rows),
        "optimal_return": optimal_return(model, grid_map, config.train.gamma),
    }
    return _finish(outcome, grid_map, seed, _settings(config, "train", "network"))


def actor_for(snapshot: AgentSnapshot):
    if snapshot.kind == "dsr":
        return DSRActor(snapshot.params)
    if snapshot.kind == "qnet":
        return QNetActor(snapshot.params)
    raise SnapshotError(f"无法评估类型为 {snapshot.kind} 的快照")


def run_eval_experiment(
    config: ExperimentConfig,
    snapshot_path: Optional[str] = None,
    seed: Optional[int] = None,
    output: Optional[str] = None,
    episodes: Optional[int] = None,
) -> ExperimentOutcome:
    """评估快照中的贪心策略，并给出 Q* 策略与随机策略作为参照

    没有快照时只评估参照策略。
    """
    seed = config.seed if seed is None else seed
    n_episodes = config.eval.episodes if episodes is None else episodes
    snapshot = load_snapshot(expand_path(snapshot_path)) if snapshot_path else None
    grid_map = snapshot.grid_map() if snapshot else build_map(config)
    outcome = ExperimentOutcome("eval", output_dir_for(config, "eval", seed, output))

    model = build_transition_model(grid_map)
    Q_star = value_iteration(model.T, model.R, config.train.gamma, terminal=model.terminal)
    actors = {"optimal": TabularActor(model, Q_star), "random": RandomActor(seed)}
    if snapshot:
        actors = {snapshot.kind: actor_for(snapshot), **actors}

    for label, actor in actors.items():
        result = evaluate_policy(actor, grid_map, n_episodes, seed, config.eval.epsilon)
        outcome.results[f"{label}.mean"] = result.mean
        outcome.results[f"{label}.std"] = result.std
    return _finish(outcome, grid_map, seed, _settings(config, "eval"))


def run_distal_experiment(
    config: ExperimentConfig,
    snapshot_path: str,
    seed: Optional[int] = None,
    output: Optional[str] = None,
) -> ExperimentOutcome:
    """把目标奖励改为 distal.goal_reward，只重新学习 w

    配置了 distal.baseline_snapshot 时，对照 Q 网络在同一新地图上继续完整训练，
    结果写入 baseline_distal.csv。
    """
    seed = config.seed if seed is None else seed
    snapshot = load_snapshot(expand_path(snapshot_path))
    if snapshot.kind != "dsr":
        raise SnapshotError(f"远端奖励实验需要 DSR 快照，实际为 {snapshot.kind}")
    new_map = snapshot.grid_map().with_rewards(goal_reward=config.distal.goal_reward)
    outcome = ExperimentOutcome("distal", output_dir_for(config, "distal", seed, output))

    result = distal_reward_adapt(snapshot, new_map, config, seed)
    outcome.files.append(write_metrics(result.rows, outcome.output_dir / DISTAL_FILE, DistalRow))
    outcome.results = {
        "oracle": result.oracle,
        "final_rel_error": result.final_error,
        "steps_to_tolerance": result.steps_to_tolerance,
    }

    if config.distal.baseline_snapshot:
        base = load_snapshot(expand_path(config.distal.baseline_snapshot))
        retrain = baseline_distal_retrain(base, new_map, config, seed)
        outcome.files.append(
            write_metrics(retrain.rows, outcome.output_dir / BASELINE_DISTAL_FILE, DistalRow)
        )
        outcome.results.update(
            {
                "baseline.oracle": retrain.oracle,
                "baseline.final_rel_error": retrain.final_error,
                "baseline.steps_to_tolerance": retrain.steps_to_tolerance,
            }
        )
    return _finish(outcome, new_map, seed, _settings(config, "distal"))


def subgoal_rows(ranking: SubgoalRanking) -> list[SubgoalRow]:
    return [
        SubgoalRow(
            state_id=c.state_id,
            row=c.cell[0],
            col=c.cell[1],
            boundary_count=c.count,
            rank=c.rank,
        )
        for c in ranking.candidates
    ]


def run_subgoal_experiment(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    output: Optional[str] = None,
    map_source: Optional[str] = None,
) -> ExperimentOutcome:
    """重复采样与切分，写出 subgoals.csv 与 partition.txt

    表格来源另外导出 sr.csv，学到的来源另外保存训练快照。

    partition.txt 取第一次重复的样本图做 subgoals.segments 段的递归切分，
    并用 ``*`` 标出排名前 k 的子目标。
    """
    s = config.subgoals
    seed = config.seed if seed is None else seed
    grid_map = build_map(config, map_source)
    outcome = ExperimentOutcome("subgoals", output_dir_for(config, "subgoals", seed, output))

    source, snapshot = subgoal_source(grid_map, config, seed)
    ranking = aggregate_topk(
        grid_map,
        source,
        runs=s.runs,
        k=s.k,
        seed=seed,
        n_samples=s.n_samples,
        sigma=subgoal_sigma(config),
        action_mode=s.action_mode,
        dedupe=s.dedupe,
        partition=s.partition,
        eigen_method=s.eigen_method,
        workers=s.workers,
    )
    outcome.files.append(
        write_metrics(subgoal_rows(ranking), outcome.output_dir / SUBGOALS_FILE, SubgoalRow)
    )
    if snapshot is not None:
        outcome.files.append(save_snapshot(snapshot, outcome.output_dir / SNAPSHOT_FILE))
    if isinstance(source, TabularSR):
        outcome.files.append(export_sr_csv(source.M, source.model, outcome.output_dir / SR_FILE))

    first = ranking.runs[0]
    labels, _ = recursive_partition(
        first.graph, s.segments, s.max_ncut, s.partition, s.eigen_method
    )
    overlay = partition_overlay(
        grid_map,
        labels_by_state(first.samples.state_ids, labels),
        [c.state_id for c in ranking.candidates],
    )
    outcome.files.append(write_text(overlay, outcome.output_dir / PARTITION_FILE))

    outcome.results = {
        f"rank_{c.rank}": f"{c.cell} × {c.count}/{s.runs}" for c in ranking.candidates
    }
    outcome.results["first_run_ncut"] = first.cut.ncut_value
    return _finish(outcome, grid_map, seed, _settings(config, "subgoals"), overlay)
