"""Closed-loop racing environment.

Each control step composes the Pure Pursuit baseline with the agent's
residual action, integrates the vehicle, and scores progress along the
track.  Episodes terminate when the car (a disc of ``car_radius``) leaves
the corridor, and truncate at ``max_steps``.

The reward is built from five named terms:

- ``r_adv``: arc-length progress per step, normalised by ``v_max * dt``;
- ``r_speed``: current speed over ``v_max``;
- ``r_dev``: gated lateral-deviation penalty, normalised by the local
  corridor half-width on the side being approached;
- ``r_heading``: gated heading-error penalty, normalised by ``psi_max``;
- ``r_coll``: -1 on collision.

They combine as ``r_total = r_pos + r_pos * (r_dev + r_heading) + r_coll``
with ``r_pos = r_adv + r_speed``: the penalties scale the positive progress
signal rather than standing alone, so a slow car cannot farm small penalties.

Observations are ``[d, delta_psi, vx, vy, r]`` followed by three forward
blocks (raceline, left edge, right edge) of ``n_waypoints`` body-frame
points each: ``5 + 6 * n_waypoints`` values in total.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import control as ctl
from . import dynamics as dyn
from . import trackmodel as tm

__all__ = [
    "ObservationConfig",
    "RewardConfig",
    "EpisodeConfig",
    "RewardBreakdown",
    "build_observation",
    "compute_reward",
    "update_curriculum",
    "RacingEnv",
    "TELEMETRY_FIELDS",
]

TELEMETRY_FIELDS = (
    "step",
    "t",
    "s",
    "d",
    "delta_psi",
    "x",
    "y",
    "phi",
    "vx",
    "vy",
    "r",
    "delta_cmd",
    "v_cmd",
    "r_adv",
    "r_speed",
    "r_dev",
    "r_heading",
    "r_coll",
    "r_tot",
)


@dataclass(frozen=True)
class ObservationConfig:
    n_waypoints: int = 20
    spacing: float = 0.5

    def __post_init__(self):
        if self.n_waypoints < 1:
            raise ValueError(f"n_waypoints must be >= 1, got {self.n_waypoints}")
        if self.spacing <= 0.0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @property
    def dim(self) -> int:
        return 5 + 6 * self.n_waypoints


@dataclass(frozen=True)
class RewardConfig:
    """Weights, gates and normalisers for the step reward.

    ``v_max = None`` inherits the actuator speed limit.  ``gating`` selects
    how a penalty activates past its threshold: ``"magnitude"`` keeps the
    error magnitude, ``"indicator"`` contributes a flat unit.  ``speed``
    selects the numerator of ``r_speed``: planar speed or ``vx`` alone.
    """

    alpha_dev: float = 1.0
    tau_dev: float = 0.1
    alpha_heading: float = 0.25
    tau_heading: float = 0.0
    psi_max: float = math.pi
    v_max: float | None = None
    gating: str = "magnitude"
    speed: str = "magnitude"

    def __post_init__(self):
        if self.gating not in ("magnitude", "indicator"):
            raise ValueError(f"gating must be 'magnitude' or 'indicator', got {self.gating!r}")
        if self.speed not in ("magnitude", "vx"):
            raise ValueError(f"speed must be 'magnitude' or 'vx', got {self.speed!r}")
        if self.psi_max <= 0.0:
            raise ValueError(f"psi_max must be positive, got {self.psi_max}")


@dataclass(frozen=True)
class EpisodeConfig:
    """Reset distribution, collision geometry and episode length."""

    max_steps: int = 2000
    car_radius: float = 0.15
    start_mode: str = "uniform"  # "uniform": random s, Gaussian speed; "fixed": pinned
    start_s: float = 0.0
    start_speed: float = 0.0  # initial vx in "fixed" mode
    v_warmstart: float = 1.5  # curriculum mean before any episode has finished
    curriculum_sigma: float = 0.5
    randomize_friction: bool = True

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.car_radius < 0.0:
            raise ValueError(f"car_radius must be >= 0, got {self.car_radius}")
        if self.start_mode not in ("uniform", "fixed"):
            raise ValueError(f"start_mode must be 'uniform' or 'fixed', got {self.start_mode!r}")


@dataclass(frozen=True)
class RewardBreakdown:
    r_adv: float
    r_speed: float
    r_dev: float
    r_heading: float
    r_coll: float
    r_total: float


def _gate(value: float, threshold: float, mode: str) -> float:
    if value <= threshold:
        return 0.0
    return value if mode == "magnitude" else 1.0


def build_observation(
    state: dyn.VehicleState,
    track: tm.TrackLayout,
    raceline: tm.Raceline,
    cfg: ObservationConfig,
    pose: tm.FrenetPose | None = None,
) -> np.ndarray:
    """Assemble the flat observation vector for one state.

    ``pose`` may carry a precomputed centerline projection; otherwise the
    state is projected here.  Preview points are anchored at the car's
    projected ``s`` and expressed in the body frame (x forward, y left).
    """
    if pose is None:
        pose = tm.cartesian_to_frenet(track, state.x, state.y)
    sample = tm.track_query(track, None, pose.s)
    delta_psi = float(tm.wrap_angle(state.phi - sample.psi_ref))
    ref, left, right = tm.sample_forward_waypoints(
        track, raceline, pose.s, cfg.spacing, cfg.n_waypoints
    )
    cos_p = math.cos(state.phi)
    sin_p = math.sin(state.phi)
    obs = np.empty(cfg.dim)
    obs[0] = pose.d
    obs[1] = delta_psi
    obs[2] = state.vx
    obs[3] = state.vy
    obs[4] = state.r
    cursor = 5
    for block in (ref, left, right):
        dx = block[:, 0] - state.x
        dy = block[:, 1] - state.y
        n = block.shape[0]
        obs[cursor : cursor + 2 * n : 2] = cos_p * dx + sin_p * dy
        obs[cursor + 1 : cursor + 2 * n : 2] = -sin_p * dx + cos_p * dy
        cursor += 2 * n
    return obs


def compute_reward(
    prev_s: float,
    new_s: float,
    state: dyn.VehicleState,
    collision: bool,
    track: tm.TrackLayout,
    cfg: RewardConfig,
    *,
    dt: float,
    v_max: float,
    frenet=None,
) -> RewardBreakdown:
    """Score one transition.

    ``frenet`` may pass a precomputed ``(d, delta_psi, w_left, w_right)``
    tuple at the new state; otherwise the projection happens here.  Progress
    ``new_s - prev_s`` is unwrapped across the start line, so driving
    backwards scores negative advancement.
    """
    if frenet is None:
        pose = tm.cartesian_to_frenet(track, state.x, state.y)
        sample = tm.track_query(track, None, pose.s)
        d = pose.d
        delta_psi = float(tm.wrap_angle(state.phi - sample.psi_ref))
        w_left, w_right = sample.w_left, sample.w_right
    else:
        d, delta_psi, w_left, w_right = frenet
    length = track.total_length
    ds = (new_s - prev_s + 0.5 * length) % length - 0.5 * length
    r_adv = ds / (v_max * dt)
    speed = math.hypot(state.vx, state.vy) if cfg.speed == "magnitude" else state.vx
    r_speed = speed / v_max
    w_side = w_left if d >= 0.0 else w_right
    r_dev = -cfg.alpha_dev * _gate(abs(d), cfg.tau_dev, cfg.gating) / w_side
    r_heading = -cfg.alpha_heading * _gate(abs(delta_psi), cfg.tau_heading, cfg.gating) / cfg.psi_max
    r_coll = -1.0 if collision else 0.0
    r_pos = r_adv + r_speed
    r_total = r_pos + r_pos * (r_dev + r_heading) + r_coll
    return RewardBreakdown(r_adv, r_speed, r_dev, r_heading, r_coll, r_total)


def update_curriculum(vx_trace: Sequence[float]) -> float:
    """Next episode's start-speed mean: the mean speed actually driven."""
    if len(vx_trace) == 0:
        raise ValueError("cannot update the curriculum from an empty speed trace")
    return float(np.mean(vx_trace))


class RacingEnv:
    """Residual-on-Pure-Pursuit racing loop on one track.

    ``step`` takes the agent action in ``[-1, 1]^2`` (or ``None`` for the
    plain baseline) and returns ``(obs, reward_breakdown, terminated,
    truncated, info)``.  All randomness flows through the generator handed
    to the constructor, so seeded runs are bit-for-bit reproducible.
    """

    def __init__(
        self,
        track: tm.TrackLayout,
        raceline: tm.Raceline,
        *,
        params: dyn.VehicleParams | None = None,
        tires: dyn.TireParams | None = None,
        limits: dyn.ActuatorLimits | None = None,
        friction: dyn.FrictionModel | None = None,
        pp_cfg: ctl.PurePursuitConfig | None = None,
        residual_cfg: ctl.ResidualConfig | None = None,
        obs_cfg: ObservationConfig | None = None,
        reward_cfg: RewardConfig | None = None,
        episode_cfg: EpisodeConfig | None = None,
        dt_ctrl: float = 0.025,
        dt_phys: float = 0.005,
        rng: np.random.Generator | int | None = None,
        record_telemetry: bool = False,
    ):
        self.track = track
        self.raceline = raceline
        self.params = params or dyn.VehicleParams()
        self.tires = tires or dyn.TireParams()
        self.limits = limits or dyn.ActuatorLimits()
        self.friction = friction or dyn.FrictionModel()
        self.pp_cfg = pp_cfg or ctl.PurePursuitConfig()
        self.residual_cfg = residual_cfg or ctl.ResidualConfig()
        self.obs_cfg = obs_cfg or ObservationConfig()
        self.reward_cfg = reward_cfg or RewardConfig()
        self.episode_cfg = episode_cfg or EpisodeConfig()
        self.dt = float(dt_ctrl)
        self.sim = dyn.Simulator(
            self.params, self.tires, self.limits, dt_ctrl=dt_ctrl, dt_phys=dt_phys
        )
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.record_telemetry = record_telemetry
        self.telemetry: list[tuple] = []
        self.v_max = self.reward_cfg.v_max if self.reward_cfg.v_max is not None else self.limits.v_max
        self._pose = tm.FrenetPose(0.0, 0.0)
        self._s_unwrapped = 0.0
        self._last_cross_t: float | None = None
        self._steps = 0
        self._lap_count = 0
        self._ep_reward = 0.0
        self._ep_vx_sum = 0.0
        self._done = True

    @property
    def observation_dim(self) -> int:
        return self.obs_cfg.dim

    @property
    def action_dim(self) -> int:
        return 2

    def reset(self, *, v_init_mean: float | None = None):
        """Start a new episode; returns ``(obs, info)``.

        In ``uniform`` start mode the car is placed at a random station with
        speed drawn from ``N(mean, curriculum_sigma)`` clipped to the speed
        envelope, where ``mean`` is ``v_init_mean`` (the curriculum value) or
        ``v_warmstart`` for the very first episode.  In ``fixed`` mode both
        station and speed are pinned by the episode config.
        """
        cfg = self.episode_cfg
        mu = (
            dyn.randomize_friction(self.friction, self.rng)
            if cfg.randomize_friction
            else self.friction.mu_nominal
        )
        if cfg.start_mode == "uniform":
            s0 = float(self.rng.uniform(0.0, self.track.total_length))
            mean = cfg.v_warmstart if v_init_mean is None else float(v_init_mean)
            vx0 = mean + cfg.curriculum_sigma * float(self.rng.standard_normal())
            vx0 = min(max(vx0, 0.0), self.limits.v_max)
        else:
            s0 = float(cfg.start_s) % self.track.total_length
            vx0 = float(cfg.start_speed)
        x0, y0, psi0 = tm.frenet_to_cartesian(self.track, tm.FrenetPose(s0, 0.0))
        self.sim.reset(dyn.VehicleState(x=x0, y=y0, phi=psi0, vx=vx0), mu=mu)
        self._pose = tm.FrenetPose(s0, 0.0)
        self._s_unwrapped = s0
        self._last_cross_t = 0.0 if s0 == 0.0 else None
        self._steps = 0
        self._lap_count = 0
        self._ep_reward = 0.0
        self._ep_vx_sum = 0.0
        self._done = False
        self.telemetry = []
        obs = build_observation(self.sim.state, self.track, self.raceline, self.obs_cfg, self._pose)
        info = {"s": s0, "d": 0.0, "mu": mu, "vx0": vx0}
        return obs, info

    def step(self, action):
        """Advance one control period under ``baseline + residual(action)``."""
        if self._done:
            raise RuntimeError("step() called on a finished episode; call reset() first")
        t_ctl = time.perf_counter()
        base = ctl.pp_command(self.sim.state, self.raceline, self.pp_cfg, self.params)
        residual = (0.0, 0.0) if action is None else ctl.residual_scale(action, self.residual_cfg)
        cmd = ctl.compose_command(base, residual, self.limits)
        cpu_controller = time.perf_counter() - t_ctl

        prev_s = self._pose.s
        state = self.sim.step(cmd)
        pose = tm.cartesian_to_frenet(self.track, state.x, state.y)
        sample = tm.track_query(self.track, None, pose.s)
        delta_psi = float(tm.wrap_angle(state.phi - sample.psi_ref))
        finite = all(map(math.isfinite, state.as_tuple()))
        collision = (
            not finite
            or pose.d + self.episode_cfg.car_radius > sample.w_left
            or -pose.d + self.episode_cfg.car_radius > sample.w_right
        )
        reward = compute_reward(
            prev_s,
            pose.s,
            state,
            collision,
            self.track,
            self.reward_cfg,
            dt=self.dt,
            v_max=self.v_max,
            frenet=(pose.d, delta_psi, sample.w_left, sample.w_right),
        )

        length = self.track.total_length
        ds = (pose.s - prev_s + 0.5 * length) % length - 0.5 * length
        s_prev_unwrapped = self._s_unwrapped
        self._s_unwrapped += ds
        self._steps += 1
        self._ep_reward += reward.r_total
        self._ep_vx_sum += state.vx
        t_now = self._steps * self.dt
        info = {
            "s": pose.s,
            "d": pose.d,
            "delta_psi": delta_psi,
            "collision": collision,
            "mu": self.sim.mu,
            "cmd": (cmd.delta, cmd.v),
            "pp_cmd": (base.delta, base.v),
            "cpu_controller_s": cpu_controller,
        }
        if ds > 0.0 and math.floor(self._s_unwrapped / length) > math.floor(
            s_prev_unwrapped / length
        ):
            boundary = math.floor(self._s_unwrapped / length) * length
            frac = (boundary - s_prev_unwrapped) / ds
            t_cross = (self._steps - 1) * self.dt + frac * self.dt
            if self._last_cross_t is not None:
                self._lap_count += 1
                info["lap_time"] = t_cross - self._last_cross_t
            self._last_cross_t = t_cross
        info["lap_count"] = self._lap_count

        terminated = collision
        truncated = self._steps >= self.episode_cfg.max_steps and not terminated
        self._pose = pose
        if self.record_telemetry:
            self.telemetry.append(
                (
                    self._steps,
                    t_now,
                    pose.s,
                    pose.d,
                    delta_psi,
                    state.x,
                    state.y,
                    state.phi,
                    state.vx,
                    state.vy,
                    state.r,
                    cmd.delta,
                    cmd.v,
                    reward.r_adv,
                    reward.r_speed,
                    reward.r_dev,
                    reward.r_heading,
                    reward.r_coll,
                    reward.r_total,
                )
            )
        if terminated or truncated:
            self._done = True
            info["episode"] = {
                "reward": self._ep_reward,
                "length": self._steps,
                "vx_mean": self._ep_vx_sum / self._steps,
            }
        obs = build_observation(state, self.track, self.raceline, self.obs_cfg, pose)
        return obs, reward, terminated, truncated, info
