"""Training loop: environment interaction, replay, curriculum, episode log.

All randomness is split from one ``SeedSequence`` into four independent
streams (environment, weight init, action/update noise, replay sampling),
so a seed fixes the entire run bit for bit.  The episode metrics file
contains only quantities derived from that deterministic state, never wall
time, which makes seeded logs byte-comparable across runs.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..envs import update_curriculum
from .checkpoint import save_checkpoint
from .learner import SacConfig, SacLearner
from .replay import ReplayBuffer

__all__ = ["TrainConfig", "TrainResult", "train", "METRICS_FIELDS"]

METRICS_FIELDS = (
    "episode",
    "end_step",
    "updates",
    "reward",
    "length",
    "vx_mean",
    "lap_count",
    "best_lap",
    "critic_loss",
    "actor_loss",
    "ent_coef",
)


@dataclass
class TrainConfig:
    total_steps: int = 200_000
    seed: int = 0
    metrics_path: str | None = None
    checkpoint_path: str | None = None
    checkpoint_every: int = 0  # env steps between periodic saves; 0 = final only
    curriculum: bool = True
    progress_every: int = 0  # stderr progress cadence in env steps; 0 = silent

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")


@dataclass
class TrainResult:
    steps: int
    episodes: int
    updates: int
    episode_rewards: list = field(default_factory=list)
    episode_lengths: list = field(default_factory=list)
    lap_times: list = field(default_factory=list)
    wall_time_s: float = 0.0
    learner: SacLearner | None = None


def _fmt(value) -> str:
    return repr(float(value))


def train(env_factory, sac_cfg: SacConfig, train_cfg: TrainConfig) -> TrainResult:
    """Run seeded SAC training; ``env_factory(rng)`` must build a fresh env.

    The factory receives a dedicated generator so the environment's reset
    and friction draws stay decoupled from the learner's streams.
    """
    t_start = time.perf_counter()
    env_ss, init_ss, noise_ss, buffer_ss = np.random.SeedSequence(train_cfg.seed).spawn(4)
    env = env_factory(np.random.default_rng(env_ss))
    learner = SacLearner(sac_cfg, np.random.default_rng(init_ss))
    noise_rng = np.random.default_rng(noise_ss)
    buffer = ReplayBuffer(
        sac_cfg.buffer_size, env.observation_dim, env.action_dim, np.random.default_rng(buffer_ss)
    )

    metrics_fh = None
    if train_cfg.metrics_path is not None:
        metrics_fh = open(Path(train_cfg.metrics_path), "w", encoding="utf-8", newline="\n")
        metrics_fh.write(",".join(METRICS_FIELDS) + "\n")
        metrics_fh.flush()

    result = TrainResult(steps=0, episodes=0, updates=0, learner=learner)
    last_metrics = {"critic_loss": float("nan"), "actor_loss": float("nan"), "ent_coef": float("nan")}
    act_dim = env.action_dim
    v_mean = None
    obs, _ = env.reset()
    learner.observe(obs)
    vx_trace = []
    ep_best_lap = float("nan")

    try:
        for step in range(1, train_cfg.total_steps + 1):
            if step <= sac_cfg.learning_starts:
                action = noise_rng.uniform(-1.0, 1.0, size=act_dim)
            else:
                action = learner.act_stochastic(obs, noise_rng.standard_normal(act_dim))
            next_obs, reward, terminated, truncated, info = env.step(action)
            learner.observe(next_obs)
            buffer.add(obs, action, reward.r_total, next_obs, terminated)
            obs = next_obs
            vx_trace.append(env.sim.state.vx)
            if "lap_time" in info:
                result.lap_times.append(info["lap_time"])
                if math.isnan(ep_best_lap) or info["lap_time"] < ep_best_lap:
                    ep_best_lap = info["lap_time"]

            if step > sac_cfg.learning_starts and step % sac_cfg.train_freq == 0:
                for _ in range(sac_cfg.gradient_steps):
                    batch = buffer.sample(sac_cfg.batch_size)
                    xi1 = noise_rng.standard_normal((sac_cfg.batch_size, act_dim))
                    xi2 = noise_rng.standard_normal((sac_cfg.batch_size, act_dim))
                    last_metrics = learner.update(batch, xi1, xi2)
                    result.updates += 1

            if terminated or truncated:
                episode = info["episode"]
                result.episodes += 1
                result.episode_rewards.append(episode["reward"])
                result.episode_lengths.append(episode["length"])
                if metrics_fh is not None:
                    row = (
                        str(result.episodes),
                        str(step),
                        str(result.updates),
                        _fmt(episode["reward"]),
                        str(episode["length"]),
                        _fmt(episode["vx_mean"]),
                        str(info["lap_count"]),
                        _fmt(ep_best_lap),
                        _fmt(last_metrics["critic_loss"]),
                        _fmt(last_metrics["actor_loss"]),
                        _fmt(last_metrics["ent_coef"]),
                    )
                    metrics_fh.write(",".join(row) + "\n")
                    metrics_fh.flush()
                if train_cfg.curriculum:
                    v_mean = update_curriculum(vx_trace)
                vx_trace = []
                ep_best_lap = float("nan")
                if step < train_cfg.total_steps:
                    obs, _ = env.reset(v_init_mean=v_mean)
                    learner.observe(obs)

            if train_cfg.progress_every and step % train_cfg.progress_every == 0:
                recent = result.episode_rewards[-10:]
                mean_r = float(np.mean(recent)) if recent else float("nan")
                print(
                    f"step {step}/{train_cfg.total_steps} episodes={result.episodes} "
                    f"updates={result.updates} reward(last10)={mean_r:.2f} "
                    f"laps={len(result.lap_times)}",
                    file=sys.stderr,
                    flush=True,
                )
            if (
                train_cfg.checkpoint_path is not None
                and train_cfg.checkpoint_every
                and step % train_cfg.checkpoint_every == 0
            ):
                save_checkpoint(
                    train_cfg.checkpoint_path,
                    learner,
                    extra={"seed": train_cfg.seed, "steps": step},
                )
            result.steps = step
    finally:
        if metrics_fh is not None:
            metrics_fh.close()

    if train_cfg.checkpoint_path is not None:
        save_checkpoint(
            train_cfg.checkpoint_path,
            learner,
            extra={"seed": train_cfg.seed, "steps": result.steps},
        )
    result.wall_time_s = time.perf_counter() - t_start
    return result
