"""Soft actor-critic update rule on plain numpy arrays.

One learner owns the policy, twin critics with polyak-averaged targets, the
learned temperature, their Adam optimizers, and the observation normalizer.
``update`` applies one gradient step in the order: temperature, critics,
actor, target sync.  The temperature read for the critic target and the
actor loss happens before the temperature step, and the actor step sees the
already-updated critics.

The loss methods are side-effect-free given fixed noise, which is what the
finite-difference gradient tests exercise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import Adam, Mlp, RunningNorm, soft_update
from .policy import TanhGaussianPolicy
from .replay import Batch

__all__ = ["SacConfig", "SacLearner", "critic_target"]


@dataclass(frozen=True)
class SacConfig:
    obs_dim: int
    act_dim: int
    hidden: tuple = (256, 256)
    gamma: float = 0.99
    tau: float = 0.005
    lr: float = 3e-4
    batch_size: int = 256
    buffer_size: int = 1_000_000
    learning_starts: int = 100
    train_freq: int = 1
    gradient_steps: int = 1
    target_entropy: float | None = None  # None: -act_dim
    init_log_alpha: float = 0.0
    normalize_obs: bool = True

    def __post_init__(self):
        if self.obs_dim < 1 or self.act_dim < 1:
            raise ValueError(f"bad dimensions: obs_dim={self.obs_dim}, act_dim={self.act_dim}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.lr <= 0.0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_starts < 1:
            raise ValueError(f"learning_starts must be >= 1, got {self.learning_starts}")
        if self.train_freq < 1 or self.gradient_steps < 1:
            raise ValueError("train_freq and gradient_steps must be >= 1")

    @property
    def resolved_target_entropy(self) -> float:
        if self.target_entropy is None:
            return -float(self.act_dim)
        return float(self.target_entropy)


def critic_target(
    rewards: np.ndarray,
    dones: np.ndarray,
    next_min_q: np.ndarray,
    next_log_prob: np.ndarray,
    *,
    gamma: float,
    ent_coef: float,
) -> np.ndarray:
    """Entropy-regularized one-step bootstrap target."""
    return rewards + gamma * (1.0 - dones) * (next_min_q - ent_coef * next_log_prob)


class SacLearner:
    def __init__(self, cfg: SacConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.policy = TanhGaussianPolicy(cfg.obs_dim, cfg.act_dim, cfg.hidden, rng)
        q_sizes = [cfg.obs_dim + cfg.act_dim, *cfg.hidden, 1]
        self.q1 = Mlp(q_sizes, rng)
        self.q2 = Mlp(q_sizes, rng)
        self.q1_target = Mlp(q_sizes, rng)
        self.q2_target = Mlp(q_sizes, rng)
        for t, p in zip(self.q1_target.params(), self.q1.params()):
            t[:] = p
        for t, p in zip(self.q2_target.params(), self.q2.params()):
            t[:] = p
        self.log_alpha = np.array([cfg.init_log_alpha], dtype=float)
        self.policy_opt = Adam(self.policy.params(), cfg.lr)
        self.critic_opt = Adam(self.q1.params() + self.q2.params(), cfg.lr)
        self.alpha_opt = Adam([self.log_alpha], cfg.lr)
        self.obs_norm = RunningNorm(cfg.obs_dim) if cfg.normalize_obs else None
        self.updates = 0

    # -- observation handling -------------------------------------------------

    def normalize(self, obs: np.ndarray) -> np.ndarray:
        if self.obs_norm is None:
            return np.asarray(obs, dtype=float)
        return self.obs_norm.normalize(obs)

    def observe(self, obs: np.ndarray):
        """Fold a raw observation into the running normalization statistics."""
        if self.obs_norm is not None:
            self.obs_norm.update(obs)

    # -- acting ----------------------------------------------------------------

    def act_stochastic(self, obs_raw: np.ndarray, xi: np.ndarray) -> np.ndarray:
        action, _, _ = self.policy.sample(
            self.normalize(np.atleast_2d(obs_raw)), np.atleast_2d(xi)
        )
        return action[0]

    def act_deterministic(self, obs_raw: np.ndarray) -> np.ndarray:
        return self.policy.deterministic(self.normalize(np.atleast_2d(obs_raw)))[0]

    # -- losses ------------------------------------------------------------------

    def temperature_loss(self, log_prob: np.ndarray):
        """mean(-log_alpha * (log_prob + target_entropy)); log_prob is detached."""
        pressure = float(np.mean(log_prob + self.cfg.resolved_target_entropy))
        loss = -float(self.log_alpha[0]) * pressure
        return loss, np.array([-pressure])

    def compute_targets(self, batch: Batch, xi2: np.ndarray, ent_coef: float) -> np.ndarray:
        next_n = self.normalize(batch.next_obs)
        next_actions, next_logp, _ = self.policy.sample(next_n, xi2)
        q_in = np.concatenate([next_n, next_actions], axis=1)
        q1t, _ = self.q1_target.forward(q_in)
        q2t, _ = self.q2_target.forward(q_in)
        next_min_q = np.minimum(q1t[:, 0], q2t[:, 0])
        return critic_target(
            batch.rewards, batch.dones, next_min_q, next_logp,
            gamma=self.cfg.gamma, ent_coef=ent_coef,
        )

    def critic_loss(self, obs_n: np.ndarray, actions: np.ndarray, y: np.ndarray):
        """0.5 * (MSE(Q1, y) + MSE(Q2, y)); grads ordered q1-then-q2."""
        x = np.concatenate([obs_n, actions], axis=1)
        q1, c1 = self.q1.forward(x)
        q2, c2 = self.q2.forward(x)
        e1 = q1[:, 0] - y
        e2 = q2[:, 0] - y
        n = y.shape[0]
        loss = 0.5 * (float(np.mean(e1**2)) + float(np.mean(e2**2)))
        g1, _ = self.q1.backward(c1, (e1 / n)[:, None])
        g2, _ = self.q2.backward(c2, (e2 / n)[:, None])
        return loss, g1 + g2

    def actor_loss(self, obs_n: np.ndarray, xi: np.ndarray, ent_coef: float):
        """mean(ent_coef * log pi - min(Q1, Q2)) at reparametrized actions.

        The action gradient flows back through whichever critic realizes the
        minimum for each sample (ties go to the first, matching a plain
        elementwise min), picked up as the input gradient on the action block
        of the critic input.
        """
        actions, logp, cache = self.policy.sample(obs_n, xi)
        x = np.concatenate([obs_n, actions], axis=1)
        q1, c1 = self.q1.forward(x)
        q2, c2 = self.q2.forward(x)
        q1 = q1[:, 0]
        q2 = q2[:, 0]
        n = logp.shape[0]
        loss = float(np.mean(ent_coef * logp - np.minimum(q1, q2)))
        first = q1 <= q2
        cols = slice(self.cfg.obs_dim, self.cfg.obs_dim + self.cfg.act_dim)
        _, dx1 = self.q1.backward(c1, np.where(first, -1.0 / n, 0.0)[:, None], input_grad_cols=cols)
        _, dx2 = self.q2.backward(c2, np.where(first, 0.0, -1.0 / n)[:, None], input_grad_cols=cols)
        grads = self.policy.backward(cache, dx1 + dx2, np.full(n, ent_coef / n))
        return loss, grads

    # -- one gradient step -------------------------------------------------------

    def update(self, batch: Batch, xi1: np.ndarray, xi2: np.ndarray) -> dict:
        """Apply one SAC step; xi1/xi2 are (B, act_dim) standard-normal draws."""
        obs_n = self.normalize(batch.obs)
        _, logp, _ = self.policy.sample(obs_n, xi1)
        ent_coef = float(np.exp(self.log_alpha[0]))  # value before the alpha step
        t_loss, t_grad = self.temperature_loss(logp)
        self.alpha_opt.step([t_grad])
        y = self.compute_targets(batch, xi2, ent_coef)
        c_loss, c_grads = self.critic_loss(obs_n, batch.actions, y)
        self.critic_opt.step(c_grads)
        a_loss, a_grads = self.actor_loss(obs_n, xi1, ent_coef)
        self.policy_opt.step(a_grads)
        soft_update(self.q1_target.params(), self.q1.params(), self.cfg.tau)
        soft_update(self.q2_target.params(), self.q2.params(), self.cfg.tau)
        self.updates += 1
        return {
            "critic_loss": c_loss,
            "actor_loss": a_loss,
            "temperature_loss": t_loss,
            "ent_coef": ent_coef,
        }
