# -*- coding: utf-8 -*-
import numpy as np
import pytest

from dsrlab.core.exceptions import (
    BadActionError,
    BadSpecError,
    DimensionMismatchError,
    EmptyBatchError,
    ShapeMismatchError,
)
from dsrlab.gridworld.env import encode_observation, observation_stats
from dsrlab.nn.gradcheck import check_q_phase, check_reward_phase, check_sr_phase, finite_diff_check
from dsrlab.nn.layers import dense_backward, dense_forward, init_dense
from dsrlab.nn.model import (
    NetworkSpec,
    forward_decoder,
    forward_features,
    forward_successor,
    forward_successor_all,
    grad_reward_phase,
    grad_sr_phase,
    greedy_actions,
    init_params,
    normalize_input,
    predict_reward,
    q_values,
    sr_targets,
)
from dsrlab.nn.optim import OptimizerState, sgd_momentum_step
from dsrlab.nn.qnet import grad_q_phase, init_qnet_params, q_forward, sync_qnet_target


def corridor_batch(corridor, cells=((1, 1), (1, 2), (1, 1), (1, 2))):
    obs = np.stack([encode_observation(corridor, c) for c in cells])
    next_cells = [(1, 2) if c == (1, 1) else (1, 3) for c in cells]
    next_obs = np.stack([encode_observation(corridor, c) for c in next_cells])
    terminal = np.array([c == (1, 3) for c in next_cells])
    return obs, next_obs, terminal


# =============================================================================
# 结构与前向
# =============================================================================


def test_spec_validation(small_spec):
    with pytest.raises(BadSpecError):
        init_params(NetworkSpec(obs_shape=(5, 3, 5), hidden=()), 0)
    with pytest.raises(BadSpecError):
        init_params(NetworkSpec(obs_shape=(5, 3, 5), phi_activation="tanh"), 0)
    assert NetworkSpec.from_dict(small_spec.to_dict()) == small_spec


def test_init_is_seeded(small_spec):
    a, b = init_params(small_spec, 3), init_params(small_spec, 3)
    assert a.equals(b)
    assert not a.equals(init_params(small_spec, 4))
    assert np.array_equal(a["alpha_prev.W"], a["alpha.W"])
    assert np.all(a["theta.0.b"] == 0.0)


def test_forward_shapes(corridor, small_params):
    obs = encode_observation(corridor, (1, 1))
    phi = forward_features(small_params, obs)
    assert phi.shape == (4,)
    assert forward_features(small_params, np.stack([obs, obs])).shape == (2, 4)
    assert forward_successor(small_params, phi, 2).shape == (4,)
    assert forward_successor_all(small_params, phi).shape == (4, 4)
    assert forward_decoder(small_params, phi).shape == obs.shape
    assert q_values(small_params, phi[None]).shape == (1, 4)


def test_successor_head_matches_all_actions(corridor, small_params):
    phi = forward_features(small_params, encode_observation(corridor, (1, 2)))
    every = forward_successor_all(small_params, phi)
    for a in range(4):
        assert np.allclose(forward_successor(small_params, phi, a), every[a])


def test_forward_errors(corridor, small_params):
    with pytest.raises(ShapeMismatchError):
        forward_features(small_params, np.zeros((5, 4, 4)))
    with pytest.raises(DimensionMismatchError):
        forward_successor(small_params, np.zeros(3), 0)
    with pytest.raises(BadActionError):
        forward_successor(small_params, np.zeros(4), 4)
    with pytest.raises(DimensionMismatchError):
        predict_reward(np.zeros(4), np.zeros(5))


def test_q_is_successor_dot_w(corridor, small_params):
    phi = forward_features(small_params, encode_observation(corridor, (1, 1)))
    m = forward_successor_all(small_params, phi)
    assert np.allclose(q_values(small_params, phi[None])[0], m @ small_params["w"])
    best = greedy_actions(small_params, encode_observation(corridor, (1, 1)))
    assert best.shape == (1,)


def test_dense_backward_linear_layer():
    rng = np.random.default_rng(0)
    tensors = {}
    init_dense(tensors, "lin", [3, 2], rng)
    x = rng.normal(size=(5, 3))
    out, cache = dense_forward(tensors, "lin", 1, x)
    grads, d_in = dense_backward(tensors, "lin", 1, cache, np.ones_like(out))
    assert np.allclose(grads["lin.0.W"], x.T @ np.ones((5, 2)))
    assert np.allclose(grads["lin.0.b"], [5.0, 5.0])
    assert np.allclose(d_in, np.ones((5, 2)) @ tensors["lin.0.W"].T)


# =============================================================================
# 损失与梯度
# =============================================================================


def test_reward_phase_touches_only_its_groups(corridor, small_params):
    obs, next_obs, _ = corridor_batch(corridor)
    result = grad_reward_phase(small_params, next_obs, np.array([-0.5, 1.0, -0.5, 1.0]))
    groups = {name.split(".")[0] for name in result.grads}
    assert groups == {"theta", "w", "theta_tilde"}
    assert set(result.parts) == {"loss_r", "loss_a"}
    with pytest.raises(EmptyBatchError):
        grad_reward_phase(small_params, np.zeros((0, *obs.shape[1:])), np.zeros(0))


def test_sr_phase_touches_only_alpha(corridor, small_params):
    obs, next_obs, terminal = corridor_batch(corridor)
    result = grad_sr_phase(small_params, obs, np.array([2, 2, 0, 2]), next_obs, terminal, 0.99)
    assert set(result.grads) == {"alpha.W", "alpha.b"}
    # 未出现在批次中的动作没有梯度
    assert np.all(result.grads["alpha.W"][1] == 0.0)
    assert np.all(result.grads["alpha.W"][3] == 0.0)


def test_sr_targets_terminal_modes(corridor, small_params):
    phi = np.ones((2, 4))
    phi_next = np.full((2, 4), 2.0)
    terminal = np.array([True, False])
    absorbing, _ = sr_targets(small_params, phi, phi_next, terminal, 0.5, "absorbing")
    cut, _ = sr_targets(small_params, phi, phi_next, terminal, 0.5, "cut")
    assert np.allclose(absorbing[0], 2.0)
    assert np.allclose(cut[0], 1.0)
    assert np.allclose(absorbing[1], cut[1])
    with pytest.raises(BadSpecError):
        sr_targets(small_params, phi, phi_next, terminal, 0.5, "clip")


def test_sr_targets_uniform_averages_heads(small_params):
    rng = np.random.default_rng(3)
    phi, phi_next = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
    terminal = np.array([False, False, True])
    target, a_next = sr_targets(small_params, phi, phi_next, terminal, 0.5, "absorbing", "uniform")
    heads = forward_successor_all(small_params, phi_next, target=True)
    assert np.allclose(target[:2], phi[:2] + 0.5 * heads[:2].mean(axis=1))
    assert np.allclose(target[2], phi[2] + 0.5 * phi_next[2])
    assert np.all(a_next == -1)
    with pytest.raises(BadSpecError):
        sr_targets(small_params, phi, phi_next, terminal, 0.5, "absorbing", "softmax")


def test_input_standardization(corridor, small_spec):
    stats = observation_stats(corridor)
    plain = init_params(small_spec, 0)
    scaled = init_params(small_spec, 0, stats)
    assert np.all(plain["input.mean"] == 0.0) and np.all(plain["input.scale"] == 1.0)
    assert scaled.equals(plain, groups=("theta", "alpha", "theta_tilde", "w", "alpha_prev"))
    assert "input.mean" not in scaled.trainable_names()

    obs = np.stack([encode_observation(corridor, c) for c in corridor.passable_cells()])
    x = obs.reshape(len(obs), -1)
    expected = forward_features(plain, (x - stats[0]) * stats[1])
    assert np.allclose(forward_features(scaled, obs), expected)
    assert np.allclose(normalize_input(scaled, x).mean(axis=0), 0.0)
    with pytest.raises(ShapeMismatchError):
        init_params(small_spec, 0, (np.zeros(3), np.ones(3)))


@pytest.mark.parametrize("activation", ["linear", "relu"])
def test_gradients_match_finite_differences(corridor, activation):
    from dsrlab.agent.dsr import observation_shape

    spec = NetworkSpec(
        obs_shape=observation_shape(corridor), hidden=(8,), feature_dim=5, phi_activation=activation
    )
    params = init_params(spec, 1, observation_stats(corridor))
    rng = np.random.default_rng(2)
    params["alpha_prev.W"] = params["alpha.W"] + 0.1 * rng.normal(size=params["alpha.W"].shape)
    obs, next_obs, terminal = corridor_batch(corridor)
    actions = np.array([2, 0, 3, 2])

    report = check_reward_phase(params, next_obs, np.array([-0.5, 1.0, -0.5, 1.0]))
    assert report.passed, report.groups
    assert report.groups["alpha"].max_rel_error == 0.0
    report = check_sr_phase(params, obs, actions, next_obs, terminal, 0.99)
    assert report.passed, report.groups
    report = check_sr_phase(params, obs, actions, next_obs, terminal, 0.99, next_action="uniform")
    assert report.passed, report.groups


def test_q_network_gradients(corridor, small_spec):
    params = init_qnet_params(small_spec, 0)
    obs, next_obs, terminal = corridor_batch(corridor)
    report = check_q_phase(
        params, obs, np.array([2, 2, 1, 0]), np.array([-0.5, 1.0, -0.5, 1.0]), next_obs, terminal, 0.99
    )
    assert report.passed, report.groups


def test_q_network_target_copy(corridor, small_spec):
    params = init_qnet_params(small_spec, 0)
    obs = encode_observation(corridor, (1, 1))
    assert np.allclose(q_forward(params, obs), q_forward(params, obs, target=True))
    params["q.0.b"] += 1.0
    assert not np.allclose(q_forward(params, obs), q_forward(params, obs, target=True))
    sync_qnet_target(params)
    assert np.allclose(q_forward(params, obs), q_forward(params, obs, target=True))
    params["q_target.0.b"] += 1.0
    assert params["q.0.b"][0] != params["q_target.0.b"][0]


def test_q_phase_terminal_target(corridor, small_spec):
    params = init_qnet_params(small_spec, 0)
    obs, next_obs, _ = corridor_batch(corridor, cells=((1, 2),))
    result = grad_q_phase(params, obs, np.array([2]), np.array([1.0]), next_obs, np.array([True]), 0.99)
    q = q_forward(params, obs[0])[2]
    assert result.loss == pytest.approx((q - 1.0) ** 2)


def test_finite_diff_check_on_quadratic():
    tensors = {"x.v": np.array([1.0, -2.0, 3.0])}
    report = finite_diff_check(
        tensors, lambda: float(np.sum(tensors["x.v"] ** 2)), {"x.v": 2.0 * tensors["x.v"]}
    )
    assert report.passed
    assert np.array_equal(tensors["x.v"], [1.0, -2.0, 3.0])
    bad = finite_diff_check(tensors, lambda: float(np.sum(tensors["x.v"] ** 2)), {"x.v": tensors["x.v"]})
    assert not bad.passed


# =============================================================================
# 优化器
# =============================================================================


def test_momentum_two_steps(small_params):
    opt = OptimizerState.create(small_params, learning_rate=0.1, momentum=0.9)
    before = small_params["w"].copy()
    g = np.ones_like(before)
    sgd_momentum_step(small_params, {"w": g}, opt)
    assert np.allclose(small_params["w"] - before, -0.1 * g)
    sgd_momentum_step(small_params, {"w": g}, opt)
    assert np.allclose(small_params["w"] - before, -0.1 * g * (2.0 + 0.9))


def test_momentum_leaves_other_tensors(small_params):
    opt = OptimizerState.create(small_params, learning_rate=0.1, momentum=0.9)
    alpha = small_params["alpha.W"].copy()
    sgd_momentum_step(small_params, {"w": np.ones(4)}, opt)
    assert np.array_equal(small_params["alpha.W"], alpha)
    assert np.all(opt.velocity["alpha.W"] == 0.0)
    with pytest.raises(ShapeMismatchError):
        sgd_momentum_step(small_params, {"w": np.ones(3)}, opt)
    with pytest.raises(ShapeMismatchError):
        sgd_momentum_step(small_params, {"alpha_prev.W": alpha}, opt)
