# -*- coding: utf-8 -*-
"""
测试共用的地图与小规模配置
"""

import dataclasses

import numpy as np
import pytest

from dsrlab.core.config import ExperimentConfig, NetworkConfig, TrainConfig
from dsrlab.gridworld.maps import load_map, parse_map
from dsrlab.nn.model import NetworkSpec, init_params


@pytest.fixture
def corridor():
    return load_map("corridor")


@pytest.fixture
def test_maze():
    return load_map("test_maze")


@pytest.fixture
def two_rooms():
    return load_map("two_rooms")


@pytest.fixture
def chain_map():
    """S . . G 的单行链，用于手算"""
    return parse_map("######\n#S..G#\n######\n", name="chain")


@pytest.fixture
def small_config() -> ExperimentConfig:
    """走廊上几秒内跑完的训练配置"""
    config = ExperimentConfig()
    config.map.path = "builtin:corridor"
    config.network = NetworkConfig(hidden=[16], feature_dim=8)
    config.train = TrainConfig(
        lr=0.01,
        momentum=0.9,
        batch_size=4,
        target_sync_interval=10,
        reward_samples_init=8,
        replay_capacity=500,
        step_limit=15,
        total_episodes=6,
        epsilon_anneal_steps=30,
    )
    config.eval.episodes = 5
    config.distal = dataclasses.replace(config.distal, max_env_steps=40, batch_size=4)
    config.subgoals = dataclasses.replace(
        config.subgoals, runs=3, n_samples=200, train_episodes=3
    )
    return config


@pytest.fixture
def small_spec(corridor) -> NetworkSpec:
    from dsrlab.agent.dsr import observation_shape

    return NetworkSpec(obs_shape=observation_shape(corridor), hidden=(6,), feature_dim=4)


@pytest.fixture
def small_params(small_spec):
    return init_params(small_spec, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
