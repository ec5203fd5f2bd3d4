# -*- coding: utf-8 -*-
import numpy as np
import pytest

from dsrlab.core.exceptions import DimensionMismatchError, RangeError
from dsrlab.gridworld.env import build_transition_model
from dsrlab.gridworld.maps import Action
from dsrlab.tabular.planning import (
    bellman_residual,
    epsilon_greedy_policy,
    greedy_policy,
    optimal_return,
    policy_evaluation,
    uniform_policy,
    value_iteration,
)
from dsrlab.tabular.sr import (
    Episode,
    enumerate_transitions,
    export_sr_csv,
    monte_carlo_sr,
    q_from_sr,
    q_transition_from_sr,
    sample_episodes,
    sr_closed_form,
    sr_identity,
    sr_residual,
    sr_td_sweep,
)


def always(model, action):
    policy = np.zeros((model.n_states, model.n_actions))
    policy[:, action] = 1.0
    return policy


# =============================================================================
# 规划
# =============================================================================


def test_corridor_optimal_q(corridor):
    model = build_transition_model(corridor)
    Q = value_iteration(model.T, model.R, 0.99, terminal=model.terminal)
    s1 = model.index[(1, 1)]
    assert Q[s1, Action.EAST] == pytest.approx(0.49)
    assert np.argmax(Q[s1]) == Action.EAST
    assert bellman_residual(Q, model.T, model.R, 0.99, model.terminal) <= 1e-9


def test_optimal_return(corridor):
    model = build_transition_model(corridor)
    assert optimal_return(model, corridor) == pytest.approx(0.5)


def test_policy_helpers():
    Q = np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0]])
    greedy = greedy_policy(Q)
    assert greedy[0].tolist() == [1.0, 0.0, 0.0, 0.0]
    mixed = epsilon_greedy_policy(Q, 0.2)
    assert np.allclose(mixed.sum(axis=1), 1.0)
    assert mixed[1, 3] == pytest.approx(0.85)
    assert np.allclose(uniform_policy(2, 4), 0.25)


def test_planning_rejects_bad_inputs(corridor):
    model = build_transition_model(corridor)
    with pytest.raises(RangeError):
        policy_evaluation(model.T, model.R, uniform_policy(3, 4), 1.0)
    with pytest.raises(RangeError):
        value_iteration(model.T, model.R, 0.9, tol=0.0)
    with pytest.raises(DimensionMismatchError):
        policy_evaluation(model.T, model.R[:2], uniform_policy(3, 4), 0.9)


# =============================================================================
# 后继表示
# =============================================================================


def test_chain_sr_values(corridor):
    model = build_transition_model(corridor)
    M = sr_closed_form(model.T, always(model, Action.EAST), 0.5, model.terminal)
    s0 = model.index[(1, 1)]
    assert np.allclose(M[s0, Action.EAST], [1.0, 0.5, 0.25])
    goal = model.index[(1, 3)]
    assert np.allclose(M[goal], np.eye(3)[goal])


def test_gamma_zero_is_identity(test_maze):
    model = build_transition_model(test_maze)
    policy = uniform_policy(model.n_states, model.n_actions)
    M = sr_closed_form(model.T, policy, 0.0, model.terminal)
    assert np.allclose(M, sr_identity(model.n_states, model.n_actions))


def test_sr_satisfies_recursion(test_maze):
    model = build_transition_model(test_maze)
    policy = uniform_policy(model.n_states, model.n_actions)
    M = sr_closed_form(model.T, policy, 0.95, model.terminal)
    assert sr_residual(M, model.T, policy, 0.95, model.terminal) < 1e-9
    assert np.all(M >= -1e-12)
    # 每行的总占用不超过 1/(1-γ)
    assert np.all(M.sum(axis=2) <= 1.0 / 0.05 + 1e-9)


def test_sr_q_matches_policy_evaluation(test_maze):
    model = build_transition_model(test_maze)
    policy = uniform_policy(model.n_states, model.n_actions)
    M = sr_closed_form(model.T, policy, 0.9, model.terminal)
    expected = policy_evaluation(model.T, model.R, policy, 0.9, model.terminal)
    assert np.allclose(q_from_sr(M, model.R), expected, atol=1e-9)


def test_sr_of_optimal_policy_recovers_q_star(test_maze):
    model = build_transition_model(test_maze)
    Q_star = value_iteration(model.T, model.R, 0.99, terminal=model.terminal)
    policy = greedy_policy(Q_star)
    M = sr_closed_form(model.T, policy, 0.99, model.terminal)
    Q = q_transition_from_sr(M, model.T, policy, model.R, model.terminal)
    assert np.allclose(Q, Q_star, atol=1e-6)


def test_q_from_sr_dimension_check():
    with pytest.raises(DimensionMismatchError):
        q_from_sr(np.zeros((3, 4, 3)), np.zeros(2))


def test_td_sweeps_reach_closed_form(corridor):
    model = build_transition_model(corridor)
    policy = uniform_policy(model.n_states, model.n_actions)
    M = sr_identity(model.n_states, model.n_actions)
    transitions = enumerate_transitions(model)
    for _ in range(300):
        M = sr_td_sweep(M, transitions, policy, 0.5, 1.0, model.terminal)
    expected = sr_closed_form(model.T, policy, 0.5, model.terminal)
    assert np.allclose(M, expected, atol=1e-8)


def test_td_sweep_does_not_mutate_input(corridor):
    model = build_transition_model(corridor)
    M = sr_identity(model.n_states, model.n_actions)
    before = M.copy()
    episode = Episode(states=[0, 1, 2], actions=[Action.EAST, Action.EAST])
    out = sr_td_sweep(M, [episode], always(model, Action.EAST), 0.5, 0.5, model.terminal)
    assert np.array_equal(M, before)
    assert not np.array_equal(out, before)
    with pytest.raises(RangeError):
        sr_td_sweep(M, [episode], always(model, Action.EAST), 0.5, 0.0)


def test_sample_episodes_end_at_goal(corridor):
    model = build_transition_model(corridor)
    rng = np.random.default_rng(0)
    episodes = sample_episodes(model, always(model, Action.EAST), 3, rng)
    for ep in episodes:
        assert ep.states == [0, 1, 2]
        assert len(ep) == 2


def test_monte_carlo_deterministic_policy_is_exact(corridor):
    model = build_transition_model(corridor)
    rng = np.random.default_rng(0)
    mean, stderr = monte_carlo_sr(model, always(model, Action.EAST), 0.5, 0, Action.EAST, 50, rng)
    assert np.allclose(mean, [1.0, 0.5, 0.25])
    assert np.allclose(stderr, 0.0)


def test_monte_carlo_agrees_with_closed_form(test_maze):
    model = build_transition_model(test_maze)
    policy = uniform_policy(model.n_states, model.n_actions)
    M = sr_closed_form(model.T, policy, 0.9, model.terminal)
    s = model.index[(8, 1)]
    mean, stderr = monte_carlo_sr(model, policy, 0.9, s, Action.NORTH, 4000, np.random.default_rng(1))
    assert np.all(np.abs(mean - M[s, Action.NORTH]) <= 5.0 * stderr + 1e-2)


def test_export_sr_csv(tmp_path, corridor):
    model = build_transition_model(corridor)
    M = sr_closed_form(model.T, uniform_policy(3, 4), 0.5, model.terminal)
    path = tmp_path / "sr" / "sr.csv"
    assert export_sr_csv(M, model, path) == path
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "state_id,row,col,action,m_0,m_1,m_2"
    assert len(lines) == 1 + 3 * 4
