# -*- coding: utf-8 -*-
import pytest

from dsrlab.agent.dsr import run_training
from dsrlab.agent.evaluation import DSRActor, RandomActor, TabularActor, evaluate_policy
from dsrlab.core.exceptions import RangeError
from dsrlab.gridworld.env import build_transition_model
from dsrlab.tabular.planning import value_iteration


def optimal_actor(grid_map):
    model = build_transition_model(grid_map)
    return TabularActor(model, value_iteration(model.T, model.R, 0.99, terminal=model.terminal))


def test_optimal_actor_on_corridor(corridor):
    result = evaluate_policy(optimal_actor(corridor), corridor, episodes=10, seed=0, epsilon=0.0)
    assert result.episodes == 10
    assert result.mean == pytest.approx(0.5)
    assert result.std == pytest.approx(0.0)


def test_optimal_beats_random(test_maze):
    best = evaluate_policy(optimal_actor(test_maze), test_maze, episodes=20, seed=0)
    rand = evaluate_policy(RandomActor(0), test_maze, episodes=20, seed=0)
    assert best.mean > rand.mean


def test_evaluation_is_seeded(test_maze):
    a = evaluate_policy(RandomActor(1), test_maze, episodes=5, seed=3)
    b = evaluate_policy(RandomActor(1), test_maze, episodes=5, seed=3)
    assert a.returns == b.returns


def test_evaluation_ranges(corridor):
    with pytest.raises(RangeError):
        evaluate_policy(RandomActor(), corridor, episodes=0, seed=0)
    with pytest.raises(RangeError):
        evaluate_policy(RandomActor(), corridor, episodes=1, seed=0, epsilon=2.0)


def test_dsr_actor_runs(corridor, small_config):
    params = run_training(corridor, small_config, seed=0).params
    result = evaluate_policy(DSRActor(params), corridor, episodes=3, seed=0)
    assert len(result.returns) == 3
    # 回报上界: 一步 -0.5 加目标 1.0
    assert max(result.returns) <= 0.5
