"""Tests for the numpy soft actor-critic stack.

The gradient checks compare every hand-derived derivative against central
finite differences.  Relative error uses a 1e-3 floor on the denominator,
so gradients below the floor are effectively compared absolutely at 1e-7.
Seeds are fixed; with h = 1e-6 no ReLU pre-activation or twin-critic tie
sits close enough to a kink to flip branches between the two loss probes.
"""

import math

import numpy as np
import pytest

from rlpp import sac
from rlpp.sac.replay import Batch

FD_H = 1e-6
FD_TOL = 1e-4


def small_learner(seed=3):
    cfg = sac.SacConfig(
        obs_dim=6,
        act_dim=2,
        hidden=(16, 16),
        batch_size=16,
        buffer_size=1000,
        learning_starts=10,
    )
    return sac.SacLearner(cfg, np.random.default_rng(seed)), cfg


def random_batch(cfg, rng, batch=16):
    return Batch(
        obs=rng.standard_normal((batch, cfg.obs_dim)),
        actions=rng.uniform(-1.0, 1.0, (batch, cfg.act_dim)),
        rewards=rng.standard_normal(batch),
        next_obs=rng.standard_normal((batch, cfg.obs_dim)),
        dones=(rng.uniform(size=batch) < 0.2).astype(float),
    )


def fd_check(params, grads, loss_fn):
    """Max floored relative error between analytic grads and central FD."""
    worst = 0.0
    for p, g in zip(params, grads):
        flat_p = p.reshape(-1)
        flat_g = np.asarray(g).reshape(-1)
        for i in range(flat_p.size):
            keep = flat_p[i]
            flat_p[i] = keep + FD_H
            up = loss_fn()
            flat_p[i] = keep - FD_H
            down = loss_fn()
            flat_p[i] = keep
            fd = (up - down) / (2.0 * FD_H)
            err = abs(fd - flat_g[i]) / max(abs(fd), abs(flat_g[i]), 1e-3)
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------- optimizer


def test_adam_first_step_matches_closed_form():
    rng = np.random.default_rng(0)
    p0 = rng.standard_normal(7)
    g = rng.standard_normal(7)
    p = p0.copy()
    opt = sac.Adam([p], lr=1e-3)
    opt.step([g])
    # at t=1 the bias corrections cancel the moment decay exactly
    expected = p0 - 1e-3 * g / (np.abs(g) + 1e-8)
    np.testing.assert_allclose(p, expected, rtol=0, atol=1e-15)


def test_adam_rejects_wrong_gradient_count():
    opt = sac.Adam([np.zeros(3)], lr=1e-3)
    with pytest.raises(ValueError):
        opt.step([np.zeros(3), np.zeros(3)])


def test_soft_update_algebra():
    t = [np.full(4, 10.0)]
    p = [np.full(4, 20.0)]
    sac.soft_update(t, p, tau=0.25)
    np.testing.assert_allclose(t[0], np.full(4, 12.5), rtol=0, atol=1e-15)


# ---------------------------------------------------------------- policy


def test_log_prob_at_unit_gaussian_center():
    # zeroed final layer puts mu=0, log_std=0; xi=0 lands at the mode where
    # the tanh correction vanishes and log p = -act_dim * log(sqrt(2*pi))
    policy = sac.TanhGaussianPolicy(3, 2, (8,), np.random.default_rng(1))
    policy.net.weights[-1][:] = 0.0
    policy.net.biases[-1][:] = 0.0
    obs = np.ones((1, 3))
    action, logp, _ = policy.sample(obs, np.zeros((1, 2)))
    np.testing.assert_array_equal(action, [[0.0, 0.0]])
    assert logp[0] == -1.8378770664093453


def test_squashed_density_integrates_to_one():
    policy = sac.TanhGaussianPolicy(3, 1, (8, 8), np.random.default_rng(5))
    obs_row = np.array([0.4, -1.2, 0.7])
    a = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, 200_001)
    obs = np.tile(obs_row, (a.size, 1))
    logp = policy.log_prob_of(obs, a[:, None])
    mass = np.trapezoid(np.exp(logp), a)
    assert mass == pytest.approx(1.0, rel=1e-2)


def test_sample_matches_log_prob_of():
    policy = sac.TanhGaussianPolicy(4, 2, (8, 8), np.random.default_rng(2))
    rng = np.random.default_rng(3)
    obs = rng.standard_normal((5, 4))
    xi = rng.standard_normal((5, 2))
    action, logp, _ = policy.sample(obs, xi)
    np.testing.assert_allclose(policy.log_prob_of(obs, action), logp, rtol=1e-9, atol=1e-9)


def test_actions_stay_in_unit_box():
    policy = sac.TanhGaussianPolicy(4, 2, (8, 8), np.random.default_rng(2))
    rng = np.random.default_rng(4)
    action, _, _ = policy.sample(rng.standard_normal((64, 4)), 5.0 * rng.standard_normal((64, 2)))
    assert np.all(np.abs(action) <= 1.0)
    assert np.all(np.abs(policy.deterministic(rng.standard_normal((8, 4)))) <= 1.0)


# ---------------------------------------------------------------- gradients


def test_critic_gradients_match_finite_differences():
    learner, cfg = small_learner()
    rng = np.random.default_rng(11)
    batch = random_batch(cfg, rng)
    xi2 = rng.standard_normal((16, cfg.act_dim))
    obs_n = learner.normalize(batch.obs)
    y = learner.compute_targets(batch, xi2, ent_coef=1.0)
    _, grads = learner.critic_loss(obs_n, batch.actions, y)
    params = learner.q1.params() + learner.q2.params()
    worst = fd_check(params, grads, lambda: learner.critic_loss(obs_n, batch.actions, y)[0])
    assert worst < FD_TOL


def test_actor_gradients_match_finite_differences():
    learner, cfg = small_learner()
    rng = np.random.default_rng(12)
    batch = random_batch(cfg, rng)
    xi = rng.standard_normal((16, cfg.act_dim))
    obs_n = learner.normalize(batch.obs)
    _, grads = learner.actor_loss(obs_n, xi, ent_coef=0.37)
    worst = fd_check(
        learner.policy.params(), grads, lambda: learner.actor_loss(obs_n, xi, ent_coef=0.37)[0]
    )
    assert worst < FD_TOL


def test_temperature_gradient_matches_finite_differences():
    learner, cfg = small_learner()
    rng = np.random.default_rng(13)
    logp = rng.standard_normal(16) - 2.0
    _, grad = learner.temperature_loss(logp)
    worst = fd_check([learner.log_alpha], [grad], lambda: learner.temperature_loss(logp)[0])
    assert worst < FD_TOL


def test_critic_target_formula():
    rewards = np.array([1.0, 2.0])
    dones = np.array([0.0, 1.0])
    next_min_q = np.array([10.0, 10.0])
    next_logp = np.array([-3.0, -3.0])
    y = sac.critic_target(rewards, dones, next_min_q, next_logp, gamma=0.9, ent_coef=0.5)
    # alive: 1 + 0.9 * (10 - 0.5 * -3) = 11.35; terminal: reward only
    np.testing.assert_allclose(y, [11.35, 2.0], rtol=0, atol=1e-12)


# ---------------------------------------------------------------- replay


def test_replay_fifo_overwrite():
    buf = sac.ReplayBuffer(4, 2, 1, np.random.default_rng(0))
    for k in range(6):
        buf.add([k, k], [k], float(k), [k + 1, k + 1], done=False)
    assert len(buf) == 4
    # slots now hold transitions 4, 5, 2, 3 (positions 0 and 1 overwritten)
    np.testing.assert_array_equal(buf.rewards, [4.0, 5.0, 2.0, 3.0])


def test_replay_sampling_uniform_with_replacement():
    buf = sac.ReplayBuffer(8, 1, 1, np.random.default_rng(42))
    for k in range(8):
        buf.add([k], [0.0], float(k), [k], done=False)
    draws = np.concatenate([buf.sample(64).rewards for _ in range(200)])
    counts = np.bincount(draws.astype(int), minlength=8)
    assert draws.size == 12_800
    # each slot expected 1600 times; allow 6 sigma of binomial noise
    assert np.all(np.abs(counts - 1600) < 6 * math.sqrt(12_800 * (1 / 8) * (7 / 8)))


def test_replay_empty_and_done_flag():
    buf = sac.ReplayBuffer(4, 1, 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        buf.sample(1)
    buf.add([0.0], [0.0], 0.0, [0.0], done=True)
    buf.add([0.0], [0.0], 0.0, [0.0], done=False)
    np.testing.assert_array_equal(buf.dones[:2], [1.0, 0.0])


# ---------------------------------------------------------------- normalizer


def test_running_norm_matches_batch_statistics():
    rng = np.random.default_rng(7)
    data = rng.standard_normal((5000, 3)) * np.array([2.0, 0.5, 1.0]) + np.array([1.0, -3.0, 0.0])
    streaming = sac.RunningNorm(3)
    for row in data:
        streaming.update(row)
    chunked = sac.RunningNorm(3)
    for block in np.array_split(data, 7):
        chunked.update(block)
    np.testing.assert_allclose(streaming.mean, data.mean(axis=0), rtol=0, atol=1e-6)
    np.testing.assert_allclose(streaming.var, data.var(axis=0), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(chunked.mean, streaming.mean, rtol=0, atol=1e-9)
    np.testing.assert_allclose(chunked.var, streaming.var, rtol=1e-9, atol=1e-9)
    z = streaming.normalize(data)
    assert abs(z.mean()) < 1e-6
    assert z.std(axis=0) == pytest.approx([1.0, 1.0, 1.0], rel=1e-3)


def test_running_norm_state_round_trip():
    norm = sac.RunningNorm(2)
    norm.update(np.random.default_rng(0).standard_normal((50, 2)))
    clone = sac.RunningNorm.from_state(norm.state())
    x = np.array([[0.3, -0.9]])
    np.testing.assert_array_equal(clone.normalize(x), norm.normalize(x))


# ---------------------------------------------------------------- learner


def test_update_moves_toward_targets_and_counts():
    learner, cfg = small_learner()
    rng = np.random.default_rng(21)
    batch = random_batch(cfg, rng)
    before = [p.copy() for p in learner.policy.params()]
    targets_before = [p.copy() for p in learner.q1_target.params()]
    stats = learner.update(
        batch,
        rng.standard_normal((16, cfg.act_dim)),
        rng.standard_normal((16, cfg.act_dim)),
    )
    assert learner.updates == 1
    assert stats["ent_coef"] == pytest.approx(1.0)  # exp(0), read before the alpha step
    assert any(not np.array_equal(a, b) for a, b in zip(before, learner.policy.params()))
    # targets moved by a factor tau toward the online critics
    for t_old, t_new, q_new in zip(
        targets_before, learner.q1_target.params(), learner.q1.params()
    ):
        np.testing.assert_allclose(
            t_new, (1 - cfg.tau) * t_old + cfg.tau * q_new, rtol=0, atol=1e-12
        )


def test_stale_temperature_is_used_for_targets():
    # two updates: the second must report the ent_coef produced by the first
    # alpha step, not the initial value
    learner, cfg = small_learner()
    rng = np.random.default_rng(22)
    batch = random_batch(cfg, rng)
    xi = lambda: rng.standard_normal((16, cfg.act_dim))
    first = learner.update(batch, xi(), xi())
    second = learner.update(batch, xi(), xi())
    assert first["ent_coef"] == pytest.approx(1.0)
    assert second["ent_coef"] == pytest.approx(float(np.exp(learner.log_alpha[0])), rel=1e-2)
    assert second["ent_coef"] != first["ent_coef"]


def test_learning_on_toy_regulator():
    """The learner must discover 'push x toward 0' on a 1-D regulator."""
    cfg = sac.SacConfig(
        obs_dim=1,
        act_dim=1,
        hidden=(32, 32),
        batch_size=64,
        buffer_size=10_000,
        learning_starts=200,
        normalize_obs=False,
    )
    learner = sac.SacLearner(cfg, np.random.default_rng(8))
    buf = sac.ReplayBuffer(cfg.buffer_size, 1, 1, np.random.default_rng(9))
    rng = np.random.default_rng(10)
    x = rng.uniform(-2.0, 2.0)
    rewards = []
    for step in range(1, 4001):
        obs = np.array([x])
        if step <= cfg.learning_starts:
            action = rng.uniform(-1.0, 1.0, size=1)
        else:
            action = learner.act_stochastic(obs, rng.standard_normal(1))
        x_next = float(np.clip(x + 0.4 * action[0], -3.0, 3.0))
        reward = -x_next**2
        done = step % 50 == 0
        buf.add(obs, action, reward, [x_next], done=False)
        rewards.append(reward)
        x = rng.uniform(-2.0, 2.0) if done else x_next
        if step > cfg.learning_starts:
            learner.update(
                buf.sample(cfg.batch_size),
                rng.standard_normal((cfg.batch_size, 1)),
                rng.standard_normal((cfg.batch_size, 1)),
            )
    early = float(np.mean(rewards[:500]))
    late = float(np.mean(rewards[-500:]))
    assert late > early + 0.3, f"no improvement: early {early:.3f}, late {late:.3f}"
    # trained policy should push hard toward the origin from either side
    assert learner.act_deterministic(np.array([2.0]))[0] < -0.5
    assert learner.act_deterministic(np.array([-2.0]))[0] > 0.5


# ---------------------------------------------------------------- checkpoint


def test_checkpoint_round_trip_is_exact(tmp_path):
    learner, cfg = small_learner()
    rng = np.random.default_rng(31)
    for _ in range(3):
        learner.observe(rng.standard_normal((4, cfg.obs_dim)))
        learner.update(
            random_batch(cfg, rng),
            rng.standard_normal((16, cfg.act_dim)),
            rng.standard_normal((16, cfg.act_dim)),
        )
    path = tmp_path / "learner.json"
    sac.save_checkpoint(path, learner, extra={"steps": 3})
    restored, extra = sac.load_checkpoint(path)
    assert extra == {"steps": 3}
    assert restored.updates == learner.updates
    for a, b in zip(restored.policy.params(), learner.policy.params()):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(restored.q1_target.params(), learner.q1_target.params()):
        np.testing.assert_array_equal(a, b)
    assert restored.policy_opt.t == learner.policy_opt.t
    for a, b in zip(restored.critic_opt.v, learner.critic_opt.v):
        np.testing.assert_array_equal(a, b)
    assert restored.log_alpha[0] == learner.log_alpha[0]
    np.testing.assert_array_equal(restored.obs_norm.mean, learner.obs_norm.mean)
    assert restored.obs_norm.count == learner.obs_norm.count
    # identical updates continue identically after a reload
    batch = random_batch(cfg, rng)
    xi1 = rng.standard_normal((16, cfg.act_dim))
    xi2 = rng.standard_normal((16, cfg.act_dim))
    learner.update(batch, xi1, xi2)
    restored.update(batch, xi1, xi2)
    for a, b in zip(restored.policy.params(), learner.policy.params()):
        np.testing.assert_array_equal(a, b)


def test_checkpoint_detects_corruption(tmp_path):
    learner, _ = small_learner()
    path = tmp_path / "learner.json"
    sac.save_checkpoint(path, learner)
    text = path.read_text()
    needle = '"updates": 0'
    assert needle in text
    path.write_text(text.replace(needle, '"updates": 7'))
    with pytest.raises(sac.CheckpointError, match="checksum"):
        sac.load_checkpoint(path)


def test_checkpoint_rejects_foreign_file(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"hello": 1}')
    with pytest.raises(sac.CheckpointError):
        sac.load_checkpoint(path)
    path.write_text("not json at all")
    with pytest.raises(sac.CheckpointError):
        sac.load_checkpoint(path)


# ---------------------------------------------------------------- training loop


def _tiny_train(oval, oval_raceline, tmp_path, seed, name, steps=400):
    from rlpp.envs import RacingEnv

    cfg = sac.SacConfig(
        obs_dim=125,
        act_dim=2,
        hidden=(16, 16),
        batch_size=16,
        buffer_size=2000,
        learning_starts=50,
    )
    metrics = tmp_path / name
    tc = sac.TrainConfig(total_steps=steps, seed=seed, metrics_path=str(metrics))
    result = sac.train(
        lambda rng: RacingEnv(oval, oval_raceline, rng=rng), cfg, tc
    )
    return result, metrics.read_bytes()


def test_seeded_training_is_reproducible(oval, oval_raceline, tmp_path):
    res_a, log_a = _tiny_train(oval, oval_raceline, tmp_path, 123, "a.csv")
    res_b, log_b = _tiny_train(oval, oval_raceline, tmp_path, 123, "b.csv")
    assert log_a == log_b
    for a, b in zip(res_a.learner.policy.params(), res_b.learner.policy.params()):
        np.testing.assert_array_equal(a, b)
    assert res_a.updates == res_b.updates == 350


def test_different_seeds_diverge(oval, oval_raceline, tmp_path):
    res_a, _ = _tiny_train(oval, oval_raceline, tmp_path, 123, "c.csv", steps=120)
    res_b, _ = _tiny_train(oval, oval_raceline, tmp_path, 124, "d.csv", steps=120)
    assert any(
        not np.array_equal(a, b)
        for a, b in zip(res_a.learner.policy.params(), res_b.learner.policy.params())
    )


def test_config_validation():
    with pytest.raises(ValueError):
        sac.SacConfig(obs_dim=0, act_dim=2)
    with pytest.raises(ValueError):
        sac.SacConfig(obs_dim=4, act_dim=2, gamma=1.5)
    with pytest.raises(ValueError):
        sac.SacConfig(obs_dim=4, act_dim=2, tau=0.0)
    with pytest.raises(ValueError):
        sac.TrainConfig(total_steps=0)
    assert sac.SacConfig(obs_dim=4, act_dim=2).resolved_target_entropy == -2.0
    assert sac.SacConfig(obs_dim=4, act_dim=2, target_entropy=-1.0).resolved_target_entropy == -1.0
