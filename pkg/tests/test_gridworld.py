# -*- coding: utf-8 -*-
import numpy as np
import pytest

from dsrlab.core.exceptions import (
    BadActionError,
    NoGoalError,
    NonRectangularError,
    NoStartError,
    StepOnTerminalError,
    UnknownCharError,
    UnreachableGoalError,
)
from dsrlab.gridworld.env import (
    AGENT_CHANNEL,
    EnvState,
    GridEnv,
    build_transition_model,
    decode_observation,
    encode_observation,
    observation_stats,
    reset,
    step,
)
from dsrlab.gridworld.maps import (
    Action,
    Tile,
    builtin_map_names,
    load_map,
    parse_map,
    random_maze,
    rooms_map,
)


# =============================================================================
# 地图解析
# =============================================================================


def test_parse_minimal_map():
    m = parse_map("####\n#SG#\n####\n")
    assert m.shape == (3, 4)
    assert m.start_cells == ((1, 1),)
    assert m.goal_cells() == [(1, 2)]
    assert not m.implicit_starts


def test_goal_only_map_has_no_start():
    with pytest.raises(NoStartError):
        parse_map("###\n#G#\n###\n")
    assert issubclass(NoStartError, UnreachableGoalError)


@pytest.mark.parametrize(
    "text, error",
    [
        ("####\n#SX#\n####\n", UnknownCharError),
        ("####\n#S.#\n####\n", NoGoalError),
        ("####\n#SG\n####\n", NonRectangularError),
        ("", NonRectangularError),
        ("#####\n#S#G#\n#####\n", UnreachableGoalError),
    ],
)
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_map(text)


def test_implicit_starts_are_empty_cells():
    m = parse_map("#####\n#.WG#\n#####\n")
    assert m.implicit_starts
    assert m.start_cells == ((1, 1),)


def test_to_text_round_trip(test_maze):
    again = parse_map(test_maze.to_text())
    assert again.same_topology(test_maze)


def test_with_rewards_keeps_layout(test_maze):
    changed = test_maze.with_rewards(goal_reward=3.0)
    assert changed.goal_reward == 3.0
    assert changed.same_topology(test_maze)
    assert test_maze.goal_reward == 1.0


def test_builtin_maps_load():
    for name in builtin_map_names():
        m = load_map(f"builtin:{name}")
        assert m.name == name
        assert m.goal_cells()


def test_rooms_map_doorway():
    m = parse_map(rooms_map(1, 2, 5))
    assert m.shape == (7, 13)
    assert m.tile((3, 6)) == Tile.EMPTY
    assert m.tile((2, 6)) == Tile.WALL


def test_random_maze_is_seeded():
    assert random_maze(11, 11, seed=3) == random_maze(11, 11, seed=3)
    m = parse_map(random_maze(15, 15, seed=0, water_fraction=0.1))
    assert np.any(m.tiles == Tile.WATER)


# =============================================================================
# 状态转移
# =============================================================================


def test_reset_single_start_ignores_seed(corridor):
    for seed in range(5):
        state, _ = reset(corridor, seed)
        assert state.agent_cell == (1, 1)
        assert state.steps_taken == 0 and not state.terminal


def test_reset_two_starts_is_balanced():
    m = parse_map("#####\n#S.S#\n#.G.#\n#####\n")
    rng = np.random.default_rng(0)
    hits = sum(reset(m, rng)[0].agent_cell == (1, 1) for _ in range(10000))
    # 3σ = 150
    assert abs(hits - 5000) < 150
    assert reset(m, 7)[0] == reset(m, 7)[0]


def test_step_rewards(test_maze):
    # (1,6) → East 进入水格 (1,7)
    state = EnvState((1, 6))
    nxt, reward, done = step(state, test_maze, Action.EAST)
    assert nxt.agent_cell == (1, 7) and reward == -1.0 and not done

    # (1,1) → North 撞墙
    nxt, reward, done = step(EnvState((1, 1)), test_maze, Action.NORTH)
    assert nxt.agent_cell == (1, 1) and reward == -0.5 and not done

    nxt, reward, done = step(EnvState((2, 8)), test_maze, Action.NORTH)
    assert nxt.agent_cell == (1, 8) and reward == 1.0 and done


def test_step_limit_truncates(corridor):
    m = corridor.with_rewards(step_limit=2)
    state = EnvState((1, 1))
    state, _, done = step(state, m, Action.WEST)
    assert not done
    state, reward, done = step(state, m, Action.WEST)
    assert done and reward == -0.5
    with pytest.raises(StepOnTerminalError):
        step(state, m, Action.EAST)


def test_bad_action(corridor):
    with pytest.raises(BadActionError):
        step(EnvState((1, 1)), corridor, 4)


def test_env_transition_flags(corridor):
    env = GridEnv(corridor, 0)
    env.reset()
    t = env.step(Action.EAST)
    assert not t.terminal and not t.truncated
    t = env.step(Action.EAST)
    assert t.terminal and not t.truncated and t.reward == 1.0
    assert env.done


def test_without_goal_exit_keeps_walking(corridor):
    m = corridor.without_goal_exit()
    assert m.same_topology(corridor) and not m.goal_terminal
    state, reward, done = step(EnvState((1, 2)), m, Action.EAST)
    assert state.agent_cell == (1, 3) and reward == 1.0 and not done
    state, _, _ = step(state, m, Action.WEST)
    assert state.agent_cell == (1, 2)

    env = GridEnv(m, 0)
    env.reset()
    env.step(Action.EAST)
    t = env.step(Action.EAST)
    assert not t.terminal and not env.done
    assert corridor.goal_terminal


# =============================================================================
# 观测与转移模型
# =============================================================================


def test_observation_round_trip(test_maze):
    for cell in test_maze.passable_cells():
        obs = encode_observation(test_maze, cell)
        assert obs[AGENT_CHANNEL].sum() == 1.0
        tiles, back = decode_observation(obs)
        assert back == cell
        assert np.array_equal(tiles, test_maze.tiles)


def test_observations_differ_only_in_agent_channel(test_maze):
    a = encode_observation(test_maze, (1, 1))
    b = encode_observation(test_maze, (8, 1))
    diff = np.nonzero(a != b)[0]
    assert set(diff.tolist()) == {AGENT_CHANNEL}


def test_transition_model_agrees_with_step(test_maze):
    model = build_transition_model(test_maze)
    assert np.allclose(model.T.sum(axis=2), 1.0)
    for s, cell in enumerate(model.states):
        if model.terminal[s]:
            assert np.all(model.next_state[s] == s)
            continue
        for a in range(model.n_actions):
            nxt, reward, _ = step(EnvState(cell), test_maze, a)
            s_next = model.next_state[s, a]
            assert model.states[s_next] == nxt.agent_cell
            assert model.R[s_next] == reward


def test_corridor_transition_model(corridor):
    model = build_transition_model(corridor)
    s1, s2, goal = model.index[(1, 1)], model.index[(1, 2)], model.index[(1, 3)]
    assert model.next_state[s1, Action.EAST] == s2
    assert model.next_state[s2, Action.EAST] == goal
    assert model.terminal[goal]
    assert set(np.unique(model.R)) <= {-1.0, -0.5, 1.0}


def test_observation_stats_standardize_agent_channel(test_maze):
    mean, scale = observation_stats(test_maze)
    cells = test_maze.passable_cells()
    obs = np.stack([encode_observation(test_maze, c).reshape(-1) for c in cells])
    x = (obs - mean) * scale
    assert mean.shape == scale.shape == (obs.shape[1],)
    assert np.allclose(x.mean(axis=0), 0.0)
    varying = obs.std(axis=0) > 0
    assert np.allclose(x[:, varying].std(axis=0), 1.0)
    assert np.all(scale[~varying] == 1.0)
    assert np.all(x[:, ~varying] == 0.0)
    # 只有智能体通道随位置变化
    per_channel = varying.reshape(encode_observation(test_maze, cells[0]).shape)
    assert per_channel[AGENT_CHANNEL].sum() == len(cells)
    assert not per_channel[:AGENT_CHANNEL].any()
