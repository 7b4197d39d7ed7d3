"""Lap evaluation: rollouts into per-lap records, statistics, metric
arithmetic, and artifact export.

The timing protocol is symmetric between controllers: launch from standstill
at the start line under fixed nominal friction and time consecutive laps at
the line crossings, so lap one includes the launch for everyone alike.  Lap
boundaries come from the environment's interpolated crossing times.

Exports format floats via ``repr`` or fixed decimals only; identical inputs
give byte-identical files.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import control as ctl
from . import dynamics as dyn
from . import trackmodel as tm
from .envs import TELEMETRY_FIELDS, EpisodeConfig, RacingEnv

__all__ = [
    "LapRecord",
    "LapStats",
    "RESULTS_FIELDS",
    "make_eval_env",
    "run_laps",
    "evaluate_alpha_grid",
    "lap_statistics",
    "improvement",
    "sim_gap",
    "gap_closure",
    "compare_metrics",
    "write_results_csv",
    "export_artifacts",
    "export_telemetry_csv",
    "export_trajectory_svg",
    "export_velocity_svg",
]


# ---------------------------------------------------------------------------
# metric arithmetic


def improvement(t_base: float, t_new: float) -> float:
    """Percent lap-time improvement of ``t_new`` over ``t_base``."""
    if t_base <= 0.0:
        raise ValueError(f"baseline time must be positive, got {t_base}")
    return (t_base - t_new) / t_base * 100.0


def sim_gap(t_sim: float, t_real: float) -> float:
    """Percent difference of the simulated time with respect to the real one."""
    if t_real <= 0.0:
        raise ValueError(f"real time must be positive, got {t_real}")
    return abs(t_sim - t_real) / t_real * 100.0


def gap_closure(t_base: float, t_new: float, t_ref: float) -> float:
    """Percent of the deficit from ``t_base`` to ``t_ref`` removed by ``t_new``."""
    deficit = t_base - t_ref
    if deficit <= 0.0:
        raise ValueError(
            f"gap closure needs base slower than reference, got base={t_base}, ref={t_ref}"
        )
    return (t_base - t_new) / deficit * 100.0


def _mean_time(value) -> float:
    return float(value.t_mean) if isinstance(value, LapStats) else float(value)


def compare_metrics(a, b, ref=None) -> dict:
    """Improvement and sim-gap of ``b`` against ``a``; closure when ``ref`` given.

    Arguments may be ``LapStats`` (their mean time is used) or plain times.
    """
    t_a = _mean_time(a)
    t_b = _mean_time(b)
    out = {"improvement": improvement(t_a, t_b), "sim_gap": sim_gap(t_a, t_b)}
    if ref is not None:
        out["gap_closure"] = gap_closure(t_a, t_b, _mean_time(ref))
    return out


# ---------------------------------------------------------------------------
# lap records and statistics


@dataclass(frozen=True)
class LapRecord:
    """One timed lap (or the flagged partial tail after a violation)."""

    index: int
    time: float  # nan on a partial lap
    violation: bool
    d_abs_mean: float
    telemetry: tuple  # telemetry rows covering this lap's steps
    cpu_s: tuple  # controller compute time per step [s]

    @property
    def complete(self) -> bool:
        return math.isfinite(self.time)


@dataclass(frozen=True)
class LapStats:
    t_mean: float
    t_std: float
    t_min: float
    t_max: float
    d_mean: float
    d_std: float
    cpu_mean_ms: float
    cpu_std_ms: float
    n_laps: int
    n_violations: int


def lap_statistics(records, ddof: int = 0) -> LapStats:
    """Aggregate lap records into the summary-table row.

    Time statistics cover complete laps; the deviation and CPU columns pool
    every telemetry row and controller invocation, partial laps included.
    ``ddof=0`` is the population convention; pass 1 for the sample one.
    """
    records = list(records)
    times = np.array([r.time for r in records if r.complete], dtype=float)
    if times.size == 0:
        raise ValueError("no complete laps to aggregate")
    d_abs = np.array(
        [abs(row[3]) for r in records for row in r.telemetry], dtype=float
    )
    cpu_ms = np.array([c for r in records for c in r.cpu_s], dtype=float) * 1e3
    return LapStats(
        t_mean=float(times.mean()),
        t_std=float(times.std(ddof=ddof)),
        t_min=float(times.min()),
        t_max=float(times.max()),
        d_mean=float(d_abs.mean()),
        d_std=float(d_abs.std(ddof=ddof)),
        cpu_mean_ms=float(cpu_ms.mean()),
        cpu_std_ms=float(cpu_ms.std(ddof=ddof)),
        n_laps=int(times.size),
        n_violations=sum(1 for r in records if r.violation),
    )


# ---------------------------------------------------------------------------
# rollouts


def make_eval_env(
    track: tm.TrackLayout,
    raceline: tm.Raceline,
    *,
    params: dyn.VehicleParams | None = None,
    tires: dyn.TireParams | None = None,
    limits: dyn.ActuatorLimits | None = None,
    pp_cfg: ctl.PurePursuitConfig | None = None,
    residual_cfg: ctl.ResidualConfig | None = None,
    obs_cfg=None,
    reward_cfg=None,
    mu: float = 0.5,
    max_steps: int = 40_000,
    dt_ctrl: float = 0.025,
    dt_phys: float = 0.005,
) -> RacingEnv:
    """Environment pinned to the timing protocol: line start, fixed friction."""
    episode = EpisodeConfig(
        max_steps=max_steps,
        start_mode="fixed",
        start_s=0.0,
        start_speed=0.0,
        randomize_friction=False,
    )
    friction = dyn.FrictionModel(mu_nominal=mu, sigma=0.0, mu_min=mu, mu_max=mu)
    return RacingEnv(
        track,
        raceline,
        params=params,
        tires=tires,
        limits=limits,
        pp_cfg=pp_cfg,
        residual_cfg=residual_cfg,
        obs_cfg=obs_cfg,
        reward_cfg=reward_cfg,
        friction=friction,
        episode_cfg=episode,
        dt_ctrl=dt_ctrl,
        dt_phys=dt_phys,
        rng=0,
        record_telemetry=True,
    )


def run_laps(env: RacingEnv, policy=None, *, laps: int = 10) -> list:
    """Drive until ``laps`` line crossings; returns one LapRecord per lap.

    ``policy`` maps a raw observation to an action in [-1, 1]^2; ``None``
    runs the plain baseline controller.  Controller CPU per step includes
    the policy evaluation when one is given.  A collision stops the attempt
    and yields a final partial record with the violation flag set.
    """
    if laps < 1:
        raise ValueError(f"laps must be >= 1, got {laps}")
    env.record_telemetry = True
    obs, _ = env.reset()
    records = []
    lap_rows = []
    lap_cpu = []
    crossed = 0
    while crossed < laps:
        t0 = time.perf_counter()
        action = None if policy is None else policy(obs)
        cpu_policy = time.perf_counter() - t0
        obs, _, terminated, truncated, info = env.step(action)
        lap_rows.append(env.telemetry[-1])
        lap_cpu.append(info["cpu_controller_s"] + cpu_policy)
        if "lap_time" in info:
            crossed += 1
            records.append(
                LapRecord(
                    index=crossed,
                    time=info["lap_time"],
                    violation=False,
                    d_abs_mean=float(np.mean([abs(r[3]) for r in lap_rows])),
                    telemetry=tuple(lap_rows),
                    cpu_s=tuple(lap_cpu),
                )
            )
            lap_rows = []
            lap_cpu = []
        if terminated or truncated:
            if lap_rows:
                records.append(
                    LapRecord(
                        index=crossed + 1,
                        time=float("nan"),
                        violation=terminated,
                        d_abs_mean=float(np.mean([abs(r[3]) for r in lap_rows])),
                        telemetry=tuple(lap_rows),
                        cpu_s=tuple(lap_cpu),
                    )
                )
            break
    return records


def evaluate_alpha_grid(
    track: tm.TrackLayout,
    raceline: tm.Raceline,
    policy,
    alphas,
    *,
    pp_cfg: ctl.PurePursuitConfig | None = None,
    residual_cfg: ctl.ResidualConfig | None = None,
    laps: int = 10,
    mu: float = 0.5,
    max_steps: int = 40_000,
    **env_kwargs,
) -> dict:
    """Lap records for the residual policy at each authority level given."""
    base = residual_cfg or ctl.ResidualConfig()
    out = {}
    for alpha in alphas:
        env = make_eval_env(
            track,
            raceline,
            pp_cfg=pp_cfg,
            residual_cfg=replace(base, alpha_rl=float(alpha)),
            mu=mu,
            max_steps=max_steps,
            **env_kwargs,
        )
        out[float(alpha)] = run_laps(env, policy, laps=laps)
    return out


# ---------------------------------------------------------------------------
# exports

RESULTS_FIELDS = (
    "controller",
    "t_mean",
    "t_std",
    "t_min",
    "t_max",
    "d_mean",
    "d_std",
    "cpu_mean_ms",
    "cpu_std_ms",
    "laps",
    "violations",
)


def _r(value: float) -> str:
    return repr(float(value))


def write_results_csv(path, rows):
    """``rows`` is an iterable of (controller name, LapStats) pairs."""
    lines = [",".join(RESULTS_FIELDS)]
    for name, st in rows:
        lines.append(
            ",".join(
                [
                    name,
                    _r(st.t_mean),
                    _r(st.t_std),
                    _r(st.t_min),
                    _r(st.t_max),
                    _r(st.d_mean),
                    _r(st.d_std),
                    _r(st.cpu_mean_ms),
                    _r(st.cpu_std_ms),
                    str(st.n_laps),
                    str(st.n_violations),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_results_csv(path) -> list:
    """Parse a results CSV back into (controller, LapStats) pairs."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != RESULTS_FIELDS:
        raise ValueError(f"{path} is not a results table (bad header)")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(RESULTS_FIELDS):
            raise ValueError(f"{path}: malformed row {ln!r}")
        name = cells[0]
        vals = [float(c) for c in cells[1:9]]
        rows.append(
            (
                name,
                LapStats(*vals, n_laps=int(cells[9]), n_violations=int(cells[10])),
            )
        )
    return rows


def export_telemetry_csv(path, rows):
    """Dump telemetry rows with exact float round-tripping."""
    lines = [",".join(TELEMETRY_FIELDS)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _svg_path(points, decimals: int = 3) -> str:
    cmds = []
    for k, (x, y) in enumerate(points):
        cmds.append(f"{'M' if k == 0 else 'L'}{x:.{decimals}f},{y:.{decimals}f}")
    return " ".join(cmds)


def export_trajectory_svg(path, track: tm.TrackLayout, telemetry_rows, *, width: int = 900):
    """Driven path over the track corridor; one path point per telemetry row."""
    length = track.total_length
    n_edge = max(int(length / 0.25), 64)
    ref, left, right = tm.sample_forward_waypoints(track, None, 0.0, length / n_edge, n_edge + 1)
    traj = np.array([(row[5], row[6]) for row in telemetry_rows], dtype=float).reshape(-1, 2)

    pts = np.vstack([left, right] + ([traj] if traj.size else []))
    x0, y0 = pts.min(axis=0) - 0.5
    x1, y1 = pts.max(axis=0) + 0.5
    scale = width / (x1 - x0)
    height = int(math.ceil((y1 - y0) * scale))

    def to_px(arr):
        arr = np.asarray(arr, dtype=float).reshape(-1, 2)
        return np.column_stack([(arr[:, 0] - x0) * scale, (y1 - arr[:, 1]) * scale])

    start = to_px(np.array([left[0], right[0]]))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<path d="{_svg_path(to_px(left))}" fill="none" stroke="#888888" stroke-width="2"/>',
        f'<path d="{_svg_path(to_px(right))}" fill="none" stroke="#888888" stroke-width="2"/>',
        f'<path d="{_svg_path(to_px(ref))}" fill="none" stroke="#bbbbbb" stroke-width="1" '
        f'stroke-dasharray="6,6"/>',
        f'<line x1="{start[0, 0]:.3f}" y1="{start[0, 1]:.3f}" x2="{start[1, 0]:.3f}" '
        f'y2="{start[1, 1]:.3f}" stroke="#000000" stroke-width="2"/>',
    ]
    if traj.size:
        parts.append(
            f'<path d="{_svg_path(to_px(traj))}" fill="none" stroke="#d7301f" '
            f'stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def export_velocity_svg(
    path, telemetry_rows, raceline: tm.Raceline | None = None, *, width: int = 900, height: int = 300
):
    """Longitudinal speed against track station, one point per telemetry row.

    Each lap retraces the s axis, overlaying consecutive laps.  The raceline
    target speed is drawn dashed for reference when given.
    """
    s = np.array([row[2] for row in telemetry_rows], dtype=float)
    vx = np.array([row[8] for row in telemetry_rows], dtype=float)
    if s.size == 0:
        raise ValueError("no telemetry rows to plot")
    s_hi = float(s.max())
    v_cap = float(vx.max())
    if raceline is not None:
        s_hi = max(s_hi, float(raceline.s[-1]))
        v_cap = max(v_cap, float(raceline.v_ref.max()))
    s_hi = max(s_hi, 1e-9)
    v_hi = 1.1 * max(v_cap, 1e-9)
    pad = 40

    def to_px(ss, vv):
        px = pad + np.asarray(ss) / s_hi * (width - 2 * pad)
        py = (height - pad) - np.asarray(vv) / v_hi * (height - 2 * pad)
        return np.column_stack([px, py])

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>',
    ]
    if raceline is not None:
        grid = np.linspace(0.0, float(raceline.s[-1]), 400)
        v_ref = np.array([raceline.speed_at(g) for g in grid])
        parts.append(
            f'<path d="{_svg_path(to_px(grid, v_ref))}" fill="none" stroke="#888888" '
            f'stroke-width="1" stroke-dasharray="5,5"/>'
        )
    parts.append(
        f'<path d="{_svg_path(to_px(s, vx))}" fill="none" stroke="#1f78b4" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{pad}" y="{pad - 8}" font-family="monospace" font-size="12">'
        f"vx [m/s] vs s [m], v_max {v_cap:.2f}</text>"
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def export_artifacts(records, out_dir, track: tm.TrackLayout, raceline: tm.Raceline | None = None):
    """Render per-lap telemetry CSVs plus trajectory and velocity SVGs.

    Complete laps land in ``lap_NN.csv``; a flagged partial tail (after a
    violation) in ``lap_partial.csv``.  Returns the list of written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = list(records)
    written = []
    for rec in records:
        name = f"lap_{rec.index:02d}.csv" if rec.complete else "lap_partial.csv"
        target = out / name
        export_telemetry_csv(target, rec.telemetry)
        written.append(target)
    all_rows = [row for rec in records for row in rec.telemetry]
    traj = out / "trajectory.svg"
    export_trajectory_svg(traj, track, all_rows)
    written.append(traj)
    vel = out / "velocity.svg"
    export_velocity_svg(vel, all_rows, raceline)
    written.append(vel)
    return written
