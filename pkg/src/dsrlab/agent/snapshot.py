# -*- coding: utf-8 -*-
"""
智能体快照
训练在回合边界处的完整状态，足以精确续跑
"""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..core.exceptions import CorruptSnapshotError
from ..gridworld.maps import GridMap, parse_map
from ..nn.model import ModelParams, NetworkSpec
from ..nn.optim import OptimizerState
from ..nn.qnet import QNetParams

SNAPSHOT_KINDS = {"dsr": ModelParams, "qnet": QNetParams}


@dataclass
class AgentSnapshot:
    """参数、优化器、计数器、各随机流状态、回放缓冲区与地图"""

    kind: str
    params: ModelParams
    opt: OptimizerState
    episode: int = 0
    global_step: int = 0
    updates: int = 0
    seed: int = 0
    rng_states: dict[str, Any] = field(default_factory=dict)
    replay: Optional[dict[str, Any]] = None
    map_text: str = ""
    map_params: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    metrics: list[dict[str, Any]] = field(default_factory=list)

    def grid_map(self) -> GridMap:
        """还原快照记录的地图 (含奖励参数)"""
        return parse_map(self.map_text, name=self.map_params.get("name", ""), **{
            k: v for k, v in self.map_params.items() if k != "name"
        })

    def to_payload(self) -> dict[str, Any]:
        """转为只含基本类型与 ndarray 的字典"""
        return {
            "kind": self.kind,
            "spec": self.params.spec.to_dict(),
            "tensors": dict(sorted(self.params.tensors.items())),
            "optimizer": {
                "learning_rate": self.opt.learning_rate,
                "momentum": self.opt.momentum,
                "velocity": dict(sorted(self.opt.velocity.items())),
            },
            "counters": {
                "episode": self.episode,
                "global_step": self.global_step,
                "updates": self.updates,
                "seed": self.seed,
            },
            "rng_states": self.rng_states,
            "replay": self.replay,
            "map": {"text": self.map_text, "params": self.map_params},
            "config": self.config,
            "metrics": self.metrics,
        }

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "AgentSnapshot":
        try:
            kind = payload["kind"]
            params_cls = SNAPSHOT_KINDS[kind]
            spec = NetworkSpec.from_dict(payload["spec"])
            tensors = {k: np.array(v, dtype=np.float64) for k, v in payload["tensors"].items()}
            opt_data = payload["optimizer"]
            opt = OptimizerState(
                learning_rate=float(opt_data["learning_rate"]),
                momentum=float(opt_data["momentum"]),
                velocity={k: np.array(v, dtype=np.float64) for k, v in opt_data["velocity"].items()},
            )
            counters = payload["counters"]
            return cls(
                kind=kind,
                params=params_cls(spec, tensors),
                opt=opt,
                episode=int(counters["episode"]),
                global_step=int(counters["global_step"]),
                updates=int(counters["updates"]),
                seed=int(counters["seed"]),
                rng_states=payload["rng_states"],
                replay=payload.get("replay"),
                map_text=payload["map"]["text"],
                map_params=payload["map"]["params"],
                config=payload.get("config", {}),
                metrics=payload.get("metrics", []),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptSnapshotError(f"快照内容不完整: {e}") from e
