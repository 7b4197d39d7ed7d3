"""Command-line front end: track inspection, training, evaluation, export.

One TOML config file drives everything; flags override individual values and
the resolved state is dumped as ``config.json`` into every output directory,
so the dump is the single source of truth for what actually ran.

Exit codes: 0 success, 2 malformed config document (TOML syntax, unknown
keys or sections), 3 invalid values (out-of-range numbers, missing or broken
referenced files), 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import control as ctl
from . import dynamics as dyn
from . import envs as envs_mod
from . import harness
from . import sac
from . import trackmodel as tm

__all__ = ["RunConfig", "ConfigError", "ValidationError", "load_run_config", "run_cli", "main"]

log = logging.getLogger("rlpp")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4


class ConfigError(Exception):
    """Structurally bad config document (syntax, unknown keys)."""


class ValidationError(Exception):
    """Well-formed config or arguments carrying unusable values."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class TrainSettings:
    total_steps: int = 200_000
    curriculum: bool = True
    checkpoint_every: int = 0
    progress_every: int = 0

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.checkpoint_every < 0 or self.progress_every < 0:
            raise ValueError("checkpoint_every and progress_every must be >= 0")


@dataclass(frozen=True)
class EvalSettings:
    laps: int = 10
    mu: float = 0.5
    max_steps: int = 40_000

    def __post_init__(self):
        if self.laps < 1:
            raise ValueError(f"laps must be >= 1, got {self.laps}")
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass(frozen=True)
class ProfileSettings:
    a_lat_max: float = 3.0
    a_lon_max: float = 2.5
    a_brake_max: float = 2.5
    v_cap: float = 6.0

    def __post_init__(self):
        for name in ("a_lat_max", "a_lon_max", "a_brake_max", "v_cap"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class RunConfig:
    track: str
    raceline: str
    seed: int
    out: str
    vehicle: dyn.VehicleParams
    tires: dyn.TireParams
    limits: dyn.ActuatorLimits
    friction: dyn.FrictionModel
    pure_pursuit: ctl.PurePursuitConfig
    residual: ctl.ResidualConfig
    observation: envs_mod.ObservationConfig
    reward: envs_mod.RewardConfig
    episode: envs_mod.EpisodeConfig
    dt_ctrl: float
    dt_phys: float
    sac: sac.SacConfig
    train: TrainSettings
    eval: EvalSettings
    profile: ProfileSettings


_BUNDLED = {
    "bundled:oval": "oval_track.csv",
    "bundled:oval-raceline": "oval_raceline.csv",
}

_TOP_SECTIONS = (
    "run",
    "vehicle",
    "tires",
    "actuators",
    "friction",
    "pure_pursuit",
    "residual",
    "observation",
    "reward",
    "episode",
    "sim",
    "sac",
    "train",
    "eval",
    "profile",
)


def _check_keys(data: dict, allowed, where: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"[{where}] unknown keys: {', '.join(unknown)}")


def _build(cls, data: dict, where: str, **computed):
    _check_keys(data, [f.name for f in fields(cls) if f.name not in computed], where)
    try:
        return cls(**data, **computed)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"[{where}] {exc}") from exc


def _build_tires(data: dict) -> dyn.TireParams:
    _check_keys(data, ("front", "rear"), "tires")
    coeffs = {}
    for axle in ("front", "rear"):
        if axle not in data:
            continue
        section = data[axle]
        if not isinstance(section, dict):
            raise ConfigError(f"[tires.{axle}] must be a table of b/c/d/e")
        coeffs[axle] = _build(dyn.PacejkaCoeffs, section, f"tires.{axle}")
    defaults = dyn.TireParams()
    return dyn.TireParams(
        front=coeffs.get("front", defaults.front),
        rear=coeffs.get("rear", defaults.rear),
    )


def load_run_config(
    path: str | None,
    *,
    seed: int | None = None,
    out: str | None = None,
    d_la: float | None = None,
    alpha_v: float | None = None,
    alpha_rl: float | None = None,
) -> RunConfig:
    """Parse the TOML config (or pure defaults) and apply flag overrides."""
    if path is None:
        data = {}
    else:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    _check_keys(data, _TOP_SECTIONS, "config")
    for name, section in data.items():
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be a table, got {type(section).__name__}")

    run = dict(data.get("run", {}))
    _check_keys(run, ("track", "raceline", "seed", "out"), "run")
    sim = dict(data.get("sim", {}))
    _check_keys(sim, ("dt_ctrl", "dt_phys"), "sim")

    observation = _build(envs_mod.ObservationConfig, data.get("observation", {}), "observation")

    sac_data = dict(data.get("sac", {}))
    for derived in ("obs_dim", "act_dim"):
        if derived in sac_data:
            raise ConfigError(
                f"[sac] {derived} is derived from the observation settings; remove it"
            )
    if "hidden" in sac_data:
        sac_data["hidden"] = tuple(sac_data["hidden"])
    sac_cfg = _build(
        sac.SacConfig, sac_data, "sac", obs_dim=observation.dim, act_dim=2
    )

    pure_pursuit = _build(ctl.PurePursuitConfig, data.get("pure_pursuit", {}), "pure_pursuit")
    residual = _build(ctl.ResidualConfig, data.get("residual", {}), "residual")
    if d_la is not None or alpha_v is not None:
        try:
            pure_pursuit = replace(
                pure_pursuit,
                **{
                    k: v
                    for k, v in (("d_lookahead", d_la), ("alpha_v", alpha_v))
                    if v is not None
                },
            )
        except ValueError as exc:
            raise ValidationError(f"pure pursuit override: {exc}") from exc
    if alpha_rl is not None:
        try:
            residual = replace(residual, alpha_rl=alpha_rl)
        except ValueError as exc:
            raise ValidationError(f"residual override: {exc}") from exc

    dt_ctrl = float(sim.get("dt_ctrl", 0.025))
    dt_phys = float(sim.get("dt_phys", 0.005))
    if dt_ctrl <= 0.0 or dt_phys <= 0.0:
        raise ValidationError(f"[sim] time steps must be positive, got {dt_ctrl}, {dt_phys}")
    ratio = dt_ctrl / dt_phys
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValidationError(
            f"[sim] dt_ctrl must be an integer multiple of dt_phys, got ratio {ratio}"
        )

    return RunConfig(
        track=str(run.get("track", "bundled:oval")),
        raceline=str(run.get("raceline", "generate")),
        seed=int(seed if seed is not None else run.get("seed", 0)),
        out=str(out if out is not None else run.get("out", "runs/out")),
        vehicle=_build(dyn.VehicleParams, data.get("vehicle", {}), "vehicle"),
        tires=_build_tires(data.get("tires", {})),
        limits=_build(dyn.ActuatorLimits, data.get("actuators", {}), "actuators"),
        friction=_build(dyn.FrictionModel, data.get("friction", {}), "friction"),
        pure_pursuit=pure_pursuit,
        residual=residual,
        observation=observation,
        reward=_build(envs_mod.RewardConfig, data.get("reward", {}), "reward"),
        episode=_build(envs_mod.EpisodeConfig, data.get("episode", {}), "episode"),
        dt_ctrl=dt_ctrl,
        dt_phys=dt_phys,
        sac=sac_cfg,
        train=_build(TrainSettings, data.get("train", {}), "train"),
        eval=_build(EvalSettings, data.get("eval", {}), "eval"),
        profile=_build(ProfileSettings, data.get("profile", {}), "profile"),
    )


def effective_config_dict(cfg: RunConfig) -> dict:
    doc = {
        "run": {"track": cfg.track, "raceline": cfg.raceline, "seed": cfg.seed, "out": cfg.out},
        "vehicle": asdict(cfg.vehicle),
        "tires": asdict(cfg.tires),
        "actuators": asdict(cfg.limits),
        "friction": asdict(cfg.friction),
        "pure_pursuit": asdict(cfg.pure_pursuit),
        "residual": asdict(cfg.residual),
        "observation": asdict(cfg.observation),
        "reward": asdict(cfg.reward),
        "episode": asdict(cfg.episode),
        "sim": {"dt_ctrl": cfg.dt_ctrl, "dt_phys": cfg.dt_phys},
        "sac": asdict(cfg.sac),
        "train": asdict(cfg.train),
        "eval": asdict(cfg.eval),
        "profile": asdict(cfg.profile),
    }
    return doc


def dump_effective_config(cfg: RunConfig, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(effective_config_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# data resolution


def _load_track(cfg: RunConfig) -> tm.TrackLayout:
    token = cfg.track
    try:
        if token in _BUNDLED:
            source = resources.files("rlpp").joinpath("data", _BUNDLED[token])
            with resources.as_file(source) as real:
                return tm.load_track(real)
        if not Path(token).exists():
            raise ValidationError(f"track file not found: {token}")
        return tm.load_track(token)
    except (tm.TrackFormatError, tm.TrackValidationError, OSError) as exc:
        raise ValidationError(f"track {token}: {exc}") from exc


def _load_raceline(cfg: RunConfig, track: tm.TrackLayout) -> tm.Raceline:
    token = cfg.raceline
    if token == "generate":
        p = cfg.profile
        return tm.centerline_raceline(
            track,
            a_lat_max=p.a_lat_max,
            a_lon_max=p.a_lon_max,
            a_brake_max=p.a_brake_max,
            v_cap=p.v_cap,
        )
    try:
        if token in _BUNDLED:
            source = resources.files("rlpp").joinpath("data", _BUNDLED[token])
            with resources.as_file(source) as real:
                return tm.load_raceline(real, track=track)
        if not Path(token).exists():
            raise ValidationError(f"raceline file not found: {token}")
        return tm.load_raceline(token, track=track)
    except (tm.TrackFormatError, tm.TrackValidationError, OSError) as exc:
        raise ValidationError(f"raceline {token}: {exc}") from exc


def _build_training_env(cfg: RunConfig, track, raceline, rng) -> envs_mod.RacingEnv:
    return envs_mod.RacingEnv(
        track,
        raceline,
        params=cfg.vehicle,
        tires=cfg.tires,
        limits=cfg.limits,
        friction=cfg.friction,
        pp_cfg=cfg.pure_pursuit,
        residual_cfg=cfg.residual,
        obs_cfg=cfg.observation,
        reward_cfg=cfg.reward,
        episode_cfg=cfg.episode,
        dt_ctrl=cfg.dt_ctrl,
        dt_phys=cfg.dt_phys,
        rng=rng,
    )


def _make_eval_env(cfg: RunConfig, track, raceline) -> envs_mod.RacingEnv:
    return harness.make_eval_env(
        track,
        raceline,
        params=cfg.vehicle,
        tires=cfg.tires,
        limits=cfg.limits,
        pp_cfg=cfg.pure_pursuit,
        residual_cfg=cfg.residual,
        obs_cfg=cfg.observation,
        reward_cfg=cfg.reward,
        mu=cfg.eval.mu,
        max_steps=cfg.eval.max_steps,
        dt_ctrl=cfg.dt_ctrl,
        dt_phys=cfg.dt_phys,
    )


def _resolve_policy(cfg: RunConfig, controller: str, checkpoint: str | None):
    """Returns (label, policy callable or None for the plain baseline)."""
    if controller == "pp":
        return "pp", None
    if controller == "rlpp":
        if checkpoint is None:
            raise ValidationError("controller 'rlpp' requires --checkpoint")
        if not Path(checkpoint).exists():
            raise ValidationError(f"checkpoint file not found: {checkpoint}")
        try:
            learner, _ = sac.load_checkpoint(checkpoint)
        except sac.CheckpointError as exc:
            raise ValidationError(str(exc)) from exc
        if learner.cfg.obs_dim != cfg.observation.dim:
            raise ValidationError(
                f"checkpoint was trained with {learner.cfg.obs_dim}-dim observations, "
                f"config produces {cfg.observation.dim}"
            )
        return "rlpp", learner.act_deterministic
    raise ValidationError(f"unknown controller {controller!r}; choose pp or rlpp")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_track(cfg: RunConfig, args) -> int:
    track = _load_track(cfg)
    if args.track_cmd == "check":
        line = None
        if cfg.raceline != "generate":
            line = _load_raceline(cfg, track)
        kappa_max = float(np.abs(track.kappa).max())
        print(f"track: {cfg.track}")
        print(f"  nodes: {track.s.size}  closed: {track.closed}")
        print(f"  length: {track.total_length:.3f} m")
        print(
            f"  width: left {track.w_left.min():.3f}..{track.w_left.max():.3f} m, "
            f"right {track.w_right.min():.3f}..{track.w_right.max():.3f} m"
        )
        print(f"  |curvature| max: {kappa_max:.4f} 1/m")
        if line is not None:
            print(
                f"raceline: {cfg.raceline}\n  nodes: {line.s.size}  "
                f"v_ref: {line.v_ref.min():.3f}..{line.v_ref.max():.3f} m/s"
            )
        print("ok")
        return EXIT_OK
    # profile
    line = tm.centerline_raceline(
        track,
        a_lat_max=cfg.profile.a_lat_max,
        a_lon_max=cfg.profile.a_lon_max,
        a_brake_max=cfg.profile.a_brake_max,
        v_cap=cfg.profile.v_cap,
    )
    out = Path(cfg.out)
    dump_effective_config(cfg, out)
    target = out / "raceline.csv"
    tm.save_raceline_csv(line, target)
    lap_bound = float(np.trapezoid(1.0 / line.v_ref, line.s))
    print(
        f"profile: v {line.v_ref.min():.3f}..{line.v_ref.max():.3f} m/s, "
        f"ideal lap bound {lap_bound:.3f} s"
    )
    print(f"wrote {target}")
    return EXIT_OK


def _cmd_train(cfg: RunConfig, args) -> int:
    track = _load_track(cfg)
    raceline = _load_raceline(cfg, track)
    out = Path(cfg.out)
    dump_effective_config(cfg, out)
    train_cfg = sac.TrainConfig(
        total_steps=cfg.train.total_steps,
        seed=cfg.seed,
        metrics_path=str(out / "train_metrics.csv"),
        checkpoint_path=str(out / "checkpoint.json"),
        checkpoint_every=cfg.train.checkpoint_every,
        curriculum=cfg.train.curriculum,
        progress_every=cfg.train.progress_every,
    )
    log.info("training for %d steps with seed %d", cfg.train.total_steps, cfg.seed)
    result = sac.train(
        lambda rng: _build_training_env(cfg, track, raceline, rng), cfg.sac, train_cfg
    )
    print(
        f"trained {result.steps} steps: {result.episodes} episodes, "
        f"{result.updates} updates, {len(result.lap_times)} laps timed, "
        f"{result.wall_time_s:.1f} s wall"
    )
    print(f"wrote {out / 'checkpoint.json'} and {out / 'train_metrics.csv'}")
    return EXIT_OK


def _eval_once(cfg: RunConfig, controller: str, checkpoint: str | None, laps: int, out: Path):
    label, policy = _resolve_policy(cfg, controller, checkpoint)
    track = _load_track(cfg)
    raceline = _load_raceline(cfg, track)
    env = _make_eval_env(cfg, track, raceline)
    records = harness.run_laps(env, policy, laps=laps)
    complete = [r for r in records if r.complete]
    if not complete:
        raise RuntimeError(
            f"{label}: no complete laps "
            f"({'collision' if any(r.violation for r in records) else 'step limit'})"
        )
    stats = harness.lap_statistics(records)
    dump_effective_config(cfg, out)
    harness.write_results_csv(out / "results.csv", [(label, stats)])
    return label, stats


def _parallel_eval_worker(payload):
    cfg, controller, checkpoint, laps, out = payload
    label, stats = _eval_once(cfg, controller, checkpoint, laps, Path(out))
    return out, label, stats


def _print_stats(label: str, stats: harness.LapStats):
    print(
        f"{label}: {stats.n_laps} laps, t {stats.t_mean:.4f} +/- {stats.t_std:.4f} s "
        f"(min {stats.t_min:.4f}, max {stats.t_max:.4f}), |d| {stats.d_mean:.4f} m, "
        f"cpu {stats.cpu_mean_ms:.3f} ms, violations {stats.n_violations}"
    )


def _cmd_eval(cfg: RunConfig, args) -> int:
    laps = args.laps if args.laps is not None else cfg.eval.laps
    if laps < 1:
        raise ValidationError(f"laps must be >= 1, got {laps}")
    out = Path(cfg.out)
    if args.parallel <= 1:
        label, stats = _eval_once(cfg, args.controller, args.checkpoint, laps, out)
        _print_stats(label, stats)
        print(f"wrote {out / 'results.csv'}")
        return EXIT_OK
    jobs = []
    for k in range(args.parallel):
        sub = out / f"seed_{cfg.seed + k}"
        sub_cfg = replace(cfg, seed=cfg.seed + k, out=str(sub))
        jobs.append((sub_cfg, args.controller, args.checkpoint, laps, str(sub)))
    with ProcessPoolExecutor(max_workers=args.parallel) as pool:
        for sub, label, stats in pool.map(_parallel_eval_worker, jobs):
            _print_stats(f"{label}[{Path(sub).name}]", stats)
    print(f"wrote {args.parallel} result tables under {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    for path in (args.a, args.b) + ((args.ref,) if args.ref else ()):
        if not Path(path).exists():
            raise ValidationError(f"results file not found: {path}")
    try:
        rows_a = harness.read_results_csv(args.a)
        rows_b = harness.read_results_csv(args.b)
        rows_ref = harness.read_results_csv(args.ref) if args.ref else None
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if not rows_a or not rows_b or (rows_ref is not None and not rows_ref):
        raise ValidationError("results tables must contain at least one row")
    name_a, stats_a = rows_a[0]
    name_b, stats_b = rows_b[0]
    ref = rows_ref[0][1] if rows_ref else None
    metrics = harness.compare_metrics(stats_a, stats_b, ref)
    print(f"{name_a}: t_mean {stats_a.t_mean:.4f} s | {name_b}: t_mean {stats_b.t_mean:.4f} s")
    print(f"improvement: {metrics['improvement']:.2f}%")
    print(f"sim_gap: {metrics['sim_gap']:.2f}%")
    if "gap_closure" in metrics:
        print(f"gap_closure: {metrics['gap_closure']:.2f}%")
    return EXIT_OK


def _cmd_export(cfg: RunConfig, args) -> int:
    laps = args.laps if args.laps is not None else cfg.eval.laps
    label, policy = _resolve_policy(cfg, args.controller, args.checkpoint)
    track = _load_track(cfg)
    raceline = _load_raceline(cfg, track)
    env = _make_eval_env(cfg, track, raceline)
    records = harness.run_laps(env, policy, laps=laps)
    if not records:
        raise RuntimeError(f"{label}: rollout produced no records")
    out = Path(cfg.out)
    dump_effective_config(cfg, out)
    written = harness.export_artifacts(records, out, track, raceline)
    print(f"{label}: exported {len(written)} files to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument grammar and dispatch


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--seed", type=int, help="override [run].seed")
    parser.add_argument("--out", help="override [run].out output directory")
    parser.add_argument("--d-la", type=float, dest="d_la", help="override lookahead distance")
    parser.add_argument("--alpha-v", type=float, dest="alpha_v", help="override speed fraction")
    parser.add_argument(
        "--alpha-rl", type=float, dest="alpha_rl", help="override residual authority"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlpp",
        description="Residual-on-Pure-Pursuit racing: tracks, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="inspect track data")
    track_sub = track.add_subparsers(dest="track_cmd", required=True)
    for name, helptext in (
        ("check", "validate track and raceline files, print a geometry summary"),
        ("profile", "compute a curvature-limited velocity profile, write raceline CSV"),
    ):
        p = track_sub.add_parser(name, help=helptext)
        _add_common(p)

    train = sub.add_parser("train", help="run seeded training")
    _add_common(train)

    ev = sub.add_parser("eval", help="timed laps for one controller")
    _add_common(ev)
    ev.add_argument("--controller", default="pp", help="pp or rlpp")
    ev.add_argument("--checkpoint", help="policy checkpoint (required for rlpp)")
    ev.add_argument("--laps", type=int, help="override [eval].laps")
    ev.add_argument(
        "--parallel",
        type=int,
        default=1,
        help="fan out N replicas with consecutive seeds to subdirectories",
    )

    cmp_p = sub.add_parser("compare", help="metrics between two results tables")
    cmp_p.add_argument("--a", required=True, help="baseline results CSV")
    cmp_p.add_argument("--b", required=True, help="new-controller results CSV")
    cmp_p.add_argument("--ref", help="reference results CSV for gap closure")

    exp = sub.add_parser("export", help="rollout and render artifacts")
    _add_common(exp)
    exp.add_argument("--controller", default="pp", help="pp or rlpp")
    exp.add_argument("--checkpoint", help="policy checkpoint (required for rlpp)")
    exp.add_argument("--laps", type=int, help="override [eval].laps")

    return parser


def _setup_logging():
    level_name = os.environ.get("RLPP_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def run_cli(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "compare":
            return _cmd_compare(args)
        cfg = load_run_config(
            args.config,
            seed=args.seed,
            out=args.out,
            d_la=args.d_la,
            alpha_v=args.alpha_v,
            alpha_rl=args.alpha_rl,
        )
        if args.command == "track":
            return _cmd_track(cfg, args)
        if args.command == "train":
            return _cmd_train(cfg, args)
        if args.command == "eval":
            if args.parallel < 1:
                raise ValidationError(f"--parallel must be >= 1, got {args.parallel}")
            return _cmd_eval(cfg, args)
        if args.command == "export":
            return _cmd_export(cfg, args)
        raise ValidationError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # runtime bucket: anything the run itself broke on
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> int:
    return run_cli()


if __name__ == "__main__":
    sys.exit(main())
