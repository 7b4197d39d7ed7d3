"""Learner checkpointing: JSON with base64 float64 arrays and a sha256 seal.

Arrays go through ``tobytes()`` so a save/load round trip is bit-exact,
including optimizer moments; resuming continues the same trajectory.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import asdict

import numpy as np

from .learner import SacConfig, SacLearner
from .nets import RunningNorm

__all__ = ["CheckpointError", "save_checkpoint", "load_checkpoint"]

_FORMAT = "sac-checkpoint-v1"


class CheckpointError(Exception):
    """Raised for unreadable, mismatched, or corrupted checkpoint files."""


def _encode(arr: np.ndarray) -> dict:
    a = np.ascontiguousarray(arr, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(blob: dict) -> np.ndarray:
    raw = base64.b64decode(blob["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(blob["shape"]).copy()


def _encode_all(params) -> list:
    return [_encode(p) for p in params]


def _decode_into(params, blobs, what: str):
    if len(blobs) != len(params):
        raise CheckpointError(f"{what}: expected {len(params)} arrays, file has {len(blobs)}")
    for p, blob in zip(params, blobs):
        arr = _decode(blob)
        if arr.shape != p.shape:
            raise CheckpointError(f"{what}: shape mismatch {arr.shape} vs {p.shape}")
        p[:] = arr


def _opt_state(opt) -> dict:
    return {"t": opt.t, "m": _encode_all(opt.m), "v": _encode_all(opt.v)}


def _restore_opt(opt, state: dict, what: str):
    opt.t = int(state["t"])
    _decode_into(opt.m, state["m"], f"{what}.m")
    _decode_into(opt.v, state["v"], f"{what}.v")


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_checkpoint(path, learner: SacLearner, extra: dict | None = None):
    """Write the learner's full state; ``extra`` rides along untouched."""
    payload = {
        "format": _FORMAT,
        "config": asdict(learner.cfg),
        "updates": learner.updates,
        "log_alpha": _encode(learner.log_alpha),
        "policy": _encode_all(learner.policy.params()),
        "q1": _encode_all(learner.q1.params()),
        "q2": _encode_all(learner.q2.params()),
        "q1_target": _encode_all(learner.q1_target.params()),
        "q2_target": _encode_all(learner.q2_target.params()),
        "policy_opt": _opt_state(learner.policy_opt),
        "critic_opt": _opt_state(learner.critic_opt),
        "alpha_opt": _opt_state(learner.alpha_opt),
        "obs_norm": learner.obs_norm.state() if learner.obs_norm is not None else None,
        "extra": extra or {},
    }
    document = {"sha256": hashlib.sha256(_canonical(payload)).hexdigest(), "payload": payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh)


def load_checkpoint(path) -> tuple[SacLearner, dict]:
    """Rebuild a learner from ``path``; returns ``(learner, extra)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(document, dict) or "payload" not in document or "sha256" not in document:
        raise CheckpointError(f"{path} is not a checkpoint file")
    payload = document["payload"]
    digest = hashlib.sha256(_canonical(payload)).hexdigest()
    if digest != document["sha256"]:
        raise CheckpointError(f"checksum mismatch in {path}: file is corrupted")
    if payload.get("format") != _FORMAT:
        raise CheckpointError(f"unsupported checkpoint format {payload.get('format')!r}")

    raw_cfg = dict(payload["config"])
    raw_cfg["hidden"] = tuple(raw_cfg["hidden"])
    cfg = SacConfig(**raw_cfg)
    learner = SacLearner(cfg, np.random.default_rng(0))  # weights replaced below
    _decode_into(learner.policy.params(), payload["policy"], "policy")
    _decode_into(learner.q1.params(), payload["q1"], "q1")
    _decode_into(learner.q2.params(), payload["q2"], "q2")
    _decode_into(learner.q1_target.params(), payload["q1_target"], "q1_target")
    _decode_into(learner.q2_target.params(), payload["q2_target"], "q2_target")
    learner.log_alpha[:] = _decode(payload["log_alpha"])
    _restore_opt(learner.policy_opt, payload["policy_opt"], "policy_opt")
    _restore_opt(learner.critic_opt, payload["critic_opt"], "critic_opt")
    _restore_opt(learner.alpha_opt, payload["alpha_opt"], "alpha_opt")
    if payload["obs_norm"] is not None:
        learner.obs_norm = RunningNorm.from_state(payload["obs_norm"])
    else:
        learner.obs_norm = None
    learner.updates = int(payload["updates"])
    return learner, payload["extra"]
