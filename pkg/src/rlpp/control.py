"""Pure Pursuit baseline and the residual action composition.

The baseline steers at the point one lookahead distance ahead of the rear
axle's raceline projection and commands a scaled-down reference speed.  A
learned agent adds a bounded residual on top of both channels:

    u = u_base + alpha_rl * (c_delta * u_nn[0], c_v * u_nn[1])

with ``u_nn`` in ``[-1, 1]^2``.  ``alpha_rl = 0`` reduces exactly to the
baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import ActuatorLimits, ControlInput, VehicleParams, VehicleState
from .trackmodel import Raceline

__all__ = [
    "PurePursuitConfig",
    "ResidualConfig",
    "rear_axle_position",
    "pp_command",
    "residual_scale",
    "compose_command",
]


@dataclass(frozen=True)
class PurePursuitConfig:
    """Lookahead distance (m) and reference-speed scale."""

    d_lookahead: float = 1.2
    alpha_v: float = 0.8

    def __post_init__(self):
        if self.d_lookahead <= 0.0:
            raise ValueError(f"d_lookahead must be positive, got {self.d_lookahead}")
        if not 0.0 < self.alpha_v <= 1.5:
            raise ValueError(f"alpha_v must be in (0, 1.5], got {self.alpha_v}")


@dataclass(frozen=True)
class ResidualConfig:
    """Residual authority ``alpha_rl`` and per-channel physical scales."""

    alpha_rl: float = 0.55
    c_delta: float = 0.4
    c_v: float = 1.0

    def __post_init__(self):
        if self.alpha_rl < 0.0:
            raise ValueError(f"alpha_rl must be non-negative, got {self.alpha_rl}")


def rear_axle_position(state: VehicleState, params: VehicleParams):
    """World position of the rear axle center."""
    return (
        state.x - params.lr * math.cos(state.phi),
        state.y - params.lr * math.sin(state.phi),
    )


def pp_command(
    state: VehicleState,
    raceline: Raceline,
    cfg: PurePursuitConfig,
    params: VehicleParams,
) -> ControlInput:
    """Pure Pursuit steering and speed command.

    The target point sits ``d_lookahead`` further along the raceline than the
    rear axle's projection; steering follows the circular-arc law
    ``atan(2 * L * y_body / d_lookahead^2)`` with ``y_body`` the target's
    lateral coordinate in the rear-axle body frame.  Speed is ``alpha_v``
    times the reference speed at the projection point.
    """
    rx, ry = rear_axle_position(state, params)
    foot = raceline.project(rx, ry)
    tx, ty, _ = raceline.point_at(foot.s + cfg.d_lookahead)
    dx = tx - rx
    dy = ty - ry
    y_body = -math.sin(state.phi) * dx + math.cos(state.phi) * dy
    delta = math.atan(2.0 * params.wheelbase * y_body / (cfg.d_lookahead**2))
    return ControlInput(delta=delta, v=cfg.alpha_v * raceline.speed_at(foot.s))


def residual_scale(u_nn, cfg: ResidualConfig):
    """Map a policy action in ``[-1, 1]^2`` to physical residual units.

    Returns ``(d_delta, d_v)``.  Components outside the unit box are
    rejected; the policy squashes through tanh, so anything else indicates a
    wiring bug rather than exploration noise.
    """
    u0, u1 = float(u_nn[0]), float(u_nn[1])
    if abs(u0) > 1.0 + 1e-9 or abs(u1) > 1.0 + 1e-9:
        raise ValueError(f"residual action out of [-1, 1]: ({u0}, {u1})")
    return cfg.alpha_rl * cfg.c_delta * u0, cfg.alpha_rl * cfg.c_v * u1


def compose_command(base: ControlInput, residual, limits: ActuatorLimits) -> ControlInput:
    """Add a physical-unit residual to a base command and clamp to limits.

    A zero residual passes the base through unchanged (no clamping drift:
    the same clamp is applied again downstream by the integrator).
    """
    d_delta, d_v = residual
    delta = min(max(base.delta + d_delta, -limits.delta_max), limits.delta_max)
    v = min(max(base.v + d_v, 0.0), limits.v_max)
    return ControlInput(delta=delta, v=v)
