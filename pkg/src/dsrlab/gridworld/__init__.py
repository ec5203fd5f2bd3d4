# -*- coding: utf-8 -*-
"""
网格世界模块
"""

from .env import (
    AGENT_CHANNEL,
    N_CHANNELS,
    EnvState,
    GridEnv,
    Transition,
    TransitionModel,
    build_transition_model,
    decode_observation,
    encode_observation,
    observation_stats,
    reset,
    step,
)
from .maps import (
    ACTION_DELTAS,
    BUILTIN_MAPS,
    Action,
    Cell,
    GridMap,
    Tile,
    builtin_map_names,
    load_map,
    neighbor,
    parse_map,
    random_maze,
    rooms_map,
)

__all__ = [
    "ACTION_DELTAS",
    "AGENT_CHANNEL",
    "BUILTIN_MAPS",
    "N_CHANNELS",
    "Action",
    "Cell",
    "EnvState",
    "GridEnv",
    "GridMap",
    "Tile",
    "Transition",
    "TransitionModel",
    "build_transition_model",
    "builtin_map_names",
    "decode_observation",
    "encode_observation",
    "load_map",
    "neighbor",
    "observation_stats",
    "parse_map",
    "random_maze",
    "reset",
    "rooms_map",
    "step",
]
