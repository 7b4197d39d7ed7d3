"""Single-track vehicle model with Pacejka lateral tire forces.

State is ``(x, y, phi, vx, vy, r)``: world position, heading, body-frame
longitudinal/lateral velocity and yaw rate.  Controls are a steering angle
and a speed command; speed is tracked by a proportional acceleration
controller, steering passes through a slew-rate limiter.

Integration is fixed-step RK4 at ``dt_phys``, with several substeps per
control period ``dt_ctrl``.  Below a small speed threshold the lateral
dynamics blend into a kinematic bicycle (the Pacejka slip angles are
ill-conditioned as ``vx -> 0``); above the threshold the model is purely
dynamic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VehicleParams",
    "PacejkaCoeffs",
    "TireParams",
    "ActuatorLimits",
    "FrictionModel",
    "VehicleState",
    "ControlInput",
    "axle_loads",
    "slip_angles",
    "lateral_tire_force",
    "derivatives",
    "step_integrate",
    "randomize_friction",
    "Simulator",
]

# Relaxation rate (1/s) pulling vy and r toward their kinematic-bicycle
# targets inside the low-speed blend band.
_KIN_RELAX_RATE = 25.0


@dataclass(frozen=True)
class VehicleParams:
    """Mass/geometry of the car (defaults: a 1:10-scale racer)."""

    m: float = 3.56
    iz: float = 0.0627
    lf: float = 0.174
    lr: float = 0.151
    gravity: float = 9.81

    @property
    def wheelbase(self) -> float:
        return self.lf + self.lr


@dataclass(frozen=True)
class PacejkaCoeffs:
    """Magic-formula coefficients for one axle."""

    b: float
    c: float
    d: float
    e: float


@dataclass(frozen=True)
class TireParams:
    front: PacejkaCoeffs = PacejkaCoeffs(b=7.67, c=0.48, d=2.0, e=1.10)
    rear: PacejkaCoeffs = PacejkaCoeffs(b=20.0, c=1.50, d=0.65, e=0.0)


@dataclass(frozen=True)
class ActuatorLimits:
    """Actuation and speed-tracking limits.

    ``v_blend_lo``/``v_blend_hi`` bound the band where the lateral dynamics
    blend from kinematic (below lo) to fully dynamic (above hi); the same
    lower bound floors ``vx`` in the slip-angle denominators.
    """

    delta_max: float = 0.4189
    delta_rate_max: float = 3.2
    a_max: float = 6.0
    a_brake_max: float = 6.0
    v_max: float = 8.0
    kp_speed: float = 2.0
    v_blend_lo: float = 0.5
    v_blend_hi: float = 1.0


@dataclass(frozen=True)
class FrictionModel:
    """Per-episode friction randomization: a clipped Gaussian around nominal."""

    mu_nominal: float = 0.5
    sigma: float = 0.15
    mu_min: float = 0.3
    mu_max: float = 0.7

    def __post_init__(self):
        if not (0.0 < self.mu_min <= self.mu_nominal <= self.mu_max):
            raise ValueError(
                f"need 0 < mu_min <= mu_nominal <= mu_max, got "
                f"({self.mu_min}, {self.mu_nominal}, {self.mu_max})"
            )


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    phi: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    r: float = 0.0

    def as_tuple(self):
        return (self.x, self.y, self.phi, self.vx, self.vy, self.r)


@dataclass(frozen=True)
class ControlInput:
    """One control-period command: steering angle (rad) and speed (m/s)."""

    delta: float
    v: float


def axle_loads(params: VehicleParams):
    """Static normal loads ``(front, rear)`` from the lever rule."""
    w = params.m * params.gravity
    return w * params.lr / params.wheelbase, w * params.lf / params.wheelbase


def slip_angles(state: VehicleState, delta: float, params: VehicleParams, limits: ActuatorLimits):
    """Front and rear slip angles with the low-speed floor on ``vx``."""
    vx_eff = max(state.vx, limits.v_blend_lo)
    alpha_f = math.atan((state.vy + state.r * params.lf) / vx_eff) - delta
    alpha_r = math.atan((state.vy - state.r * params.lr) / vx_eff)
    return alpha_f, alpha_r


def lateral_tire_force(alpha: float, fz: float, mu: float, coeffs: PacejkaCoeffs) -> float:
    """Magic-formula lateral force for one axle.

    Odd in ``alpha``, saturating at ``mu * fz * d``.  The caller is
    responsible for the slip-angle orientation; see :func:`derivatives`.
    """
    ba = coeffs.b * alpha
    return mu * fz * coeffs.d * math.sin(coeffs.c * math.atan(ba - coeffs.e * (ba - math.atan(ba))))


def _dynamic_derivatives(x, y, phi, vx, vy, r, delta, a, params, tires, mu, limits):
    fzf, fzr = axle_loads(params)
    vx_eff = max(vx, limits.v_blend_lo)
    alpha_f = math.atan((vy + r * params.lf) / vx_eff) - delta
    alpha_r = math.atan((vy - r * params.lr) / vx_eff)
    # The force must oppose the slip angle (restoring); with this slip
    # convention that means evaluating the odd magic formula at -alpha.
    fyf = lateral_tire_force(-alpha_f, fzf, mu, tires.front)
    fyr = lateral_tire_force(-alpha_r, fzr, mu, tires.rear)
    cos_phi = math.cos(phi)
    sin_phi = math.sin(phi)
    cos_d = math.cos(delta)
    return (
        vx * cos_phi - vy * sin_phi,
        vx * sin_phi + vy * cos_phi,
        r,
        a + (-fyf * math.sin(delta) + params.m * vy * r) / params.m,
        (fyr + fyf * cos_d - params.m * vx * r) / params.m,
        (fyf * params.lf * cos_d - fyr * params.lr) / params.iz,
    )


def _blended_derivatives(y6, delta, a, params, tires, mu, limits):
    x, y, phi, vx, vy, r = y6
    lo, hi = limits.v_blend_lo, limits.v_blend_hi
    w = min(max((vx - lo) / (hi - lo), 0.0), 1.0)
    dyn = _dynamic_derivatives(x, y, phi, vx, vy, r, delta, a, params, tires, mu, limits)
    if w >= 1.0:
        return dyn
    tan_d = math.tan(delta)
    vy_k = vx * params.lr * tan_d / params.wheelbase
    r_k = vx * tan_d / params.wheelbase
    kin = (
        dyn[0],
        dyn[1],
        dyn[2],
        a,
        _KIN_RELAX_RATE * (vy_k - vy),
        _KIN_RELAX_RATE * (r_k - r),
    )
    if w <= 0.0:
        return kin
    return tuple(w * fd + (1.0 - w) * fk for fd, fk in zip(dyn, kin))


def derivatives(
    state: VehicleState,
    delta: float,
    a: float,
    params: VehicleParams,
    tires: TireParams,
    mu: float,
    limits: ActuatorLimits,
):
    """Time derivative of the state under fixed ``(delta, a)``.

    Blends the Pacejka single-track model with a kinematic bicycle below
    ``v_blend_hi``: the kinematic branch relaxes ``vy`` and ``r`` toward
    ``vx*lr*tan(delta)/L`` and ``vx*tan(delta)/L``.  At standstill with
    ``delta = 0`` this reduces to ``(0, 0, 0, a, 0, 0)``.
    """
    return _blended_derivatives(state.as_tuple(), delta, a, params, tires, mu, limits)


def _rk4_substep(y0, dt, delta, a, params, tires, mu, limits):
    def f(y):
        return _blended_derivatives(y, delta, a, params, tires, mu, limits)

    k1 = f(y0)
    k2 = f(tuple(y + 0.5 * dt * k for y, k in zip(y0, k1)))
    k3 = f(tuple(y + 0.5 * dt * k for y, k in zip(y0, k2)))
    k4 = f(tuple(y + dt * k for y, k in zip(y0, k3)))
    return tuple(
        y + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        for y, a1, a2, a3, a4 in zip(y0, k1, k2, k3, k4)
    )


def step_integrate(
    state: VehicleState,
    cmd: ControlInput,
    *,
    dt_ctrl: float,
    dt_phys: float,
    params: VehicleParams,
    tires: TireParams,
    limits: ActuatorLimits,
    mu: float,
    delta_prev: float,
):
    """Advance one control period and return ``(new_state, delta_applied)``.

    The command is clamped to the actuator envelope, acceleration is held
    constant over the period (proportional speed tracking evaluated at the
    period start), and the steering slews toward the command at most
    ``delta_rate_max * dt_phys`` per substep.  ``dt_ctrl`` must be an integer
    multiple of ``dt_phys``.  ``vx`` is clamped non-negative after every
    substep; the model does not reverse.
    """
    n_sub = round(dt_ctrl / dt_phys)
    if n_sub < 1 or abs(n_sub * dt_phys - dt_ctrl) > 1e-9:
        raise ValueError(f"dt_ctrl={dt_ctrl} is not an integer multiple of dt_phys={dt_phys}")
    delta_cmd = min(max(cmd.delta, -limits.delta_max), limits.delta_max)
    v_cmd = min(max(cmd.v, 0.0), limits.v_max)
    a = min(max(limits.kp_speed * (v_cmd - state.vx), -limits.a_brake_max), limits.a_max)
    y = state.as_tuple()
    delta = delta_prev
    max_slew = limits.delta_rate_max * dt_phys
    for _ in range(n_sub):
        delta += min(max(delta_cmd - delta, -max_slew), max_slew)
        y = _rk4_substep(y, dt_phys, delta, a, params, tires, mu, limits)
        if y[3] < 0.0:
            y = (y[0], y[1], y[2], 0.0, y[4], y[5])
    return VehicleState(*y), delta


def randomize_friction(model: FrictionModel, rng: np.random.Generator) -> float:
    """Draw one episode's friction coefficient from the clipped Gaussian."""
    mu = model.mu_nominal + model.sigma * rng.standard_normal()
    return float(min(max(mu, model.mu_min), model.mu_max))


class Simulator:
    """Stateful wrapper: owns the vehicle state, applied steering and clock."""

    def __init__(
        self,
        params: VehicleParams | None = None,
        tires: TireParams | None = None,
        limits: ActuatorLimits | None = None,
        *,
        dt_ctrl: float = 0.025,
        dt_phys: float = 0.005,
        mu: float = 0.5,
    ):
        self.params = params or VehicleParams()
        self.tires = tires or TireParams()
        self.limits = limits or ActuatorLimits()
        self.dt_ctrl = float(dt_ctrl)
        self.dt_phys = float(dt_phys)
        self.mu = float(mu)
        self.state = VehicleState()
        self.delta_applied = 0.0
        self.t = 0.0

    def reset(self, state: VehicleState, *, delta: float = 0.0, mu: float | None = None):
        self.state = state
        self.delta_applied = float(delta)
        self.t = 0.0
        if mu is not None:
            self.mu = float(mu)
        return self.state

    def step(self, cmd: ControlInput) -> VehicleState:
        self.state, self.delta_applied = step_integrate(
            self.state,
            cmd,
            dt_ctrl=self.dt_ctrl,
            dt_phys=self.dt_phys,
            params=self.params,
            tires=self.tires,
            limits=self.limits,
            mu=self.mu,
            delta_prev=self.delta_applied,
        )
        self.t += self.dt_ctrl
        return self.state
