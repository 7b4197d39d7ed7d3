"""From-scratch soft actor-critic on numpy, float64 end to end.

Gradients are hand-derived and verified against finite differences in the
test suite; no autograd framework is involved.  Determinism: every source of
randomness is an explicit ``numpy.random.Generator``, so a seeded training
run reproduces bit for bit.
"""

from .nets import Adam, Mlp, RunningNorm, soft_update
from .policy import TanhGaussianPolicy
from .replay import Batch, ReplayBuffer
from .learner import SacConfig, SacLearner, critic_target
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .train import METRICS_FIELDS, TrainConfig, TrainResult, train

__all__ = [
    "Adam",
    "Mlp",
    "RunningNorm",
    "soft_update",
    "TanhGaussianPolicy",
    "Batch",
    "ReplayBuffer",
    "SacConfig",
    "SacLearner",
    "critic_target",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
    "METRICS_FIELDS",
    "TrainConfig",
    "TrainResult",
    "train",
]
