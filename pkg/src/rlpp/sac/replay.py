"""Flat-array replay buffer with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Batch", "ReplayBuffer"]


@dataclass(frozen=True)
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray


class ReplayBuffer:
    """Fixed-capacity FIFO transition store.

    Observations are kept exactly as the environment produced them; any
    normalization happens at sampling time in the learner, so statistics
    collected later still apply to old transitions.  ``dones`` should be 1.0
    only for true terminal states (collisions), not for time-limit
    truncation, so the critic target keeps bootstrapping across truncated
    episodes.
    """

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, rng: np.random.Generator):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.actions = np.zeros((self.capacity, act_dim))
        self.rewards = np.zeros(self.capacity)
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.dones = np.zeros(self.capacity)
        self.rng = rng
        self.pos = 0
        self.full = False

    def __len__(self) -> int:
        return self.capacity if self.full else self.pos

    def add(self, obs, action, reward, next_obs, done: bool):
        i = self.pos
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = 1.0 if done else 0.0
        self.pos += 1
        if self.pos == self.capacity:
            self.pos = 0
            self.full = True

    def sample(self, batch_size: int) -> Batch:
        """Uniform sample with replacement from the stored transitions."""
        n = len(self)
        if n == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = self.rng.integers(0, n, size=batch_size)
        return Batch(
            obs=self.obs[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_obs=self.next_obs[idx],
            dones=self.dones[idx],
        )
