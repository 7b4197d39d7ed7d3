"""Squashed-Gaussian actor with hand-written gradients.

The network outputs the mean and raw log-std of a diagonal Gaussian; the
action is ``tanh`` of a reparametrized draw.  Log-probabilities include the
change-of-variables correction ``log(1 - tanh(u)^2)``, computed in the
numerically safe form ``2 * (log 2 - u - softplus(-2u))``.
"""

from __future__ import annotations

import numpy as np

from .nets import Mlp

__all__ = ["TanhGaussianPolicy", "LOG_STD_MIN", "LOG_STD_MAX"]

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
_LOG_2PI = float(np.log(2.0 * np.pi))
_LOG_2 = float(np.log(2.0))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


class TanhGaussianPolicy:
    """Policy net mapping observations to squashed-Gaussian actions in [-1, 1]."""

    def __init__(
        self,
        obs_dim: int,
        act_dim: int,
        hidden,
        rng: np.random.Generator,
        *,
        final_scale: float = 1e-2,
    ):
        self.obs_dim = int(obs_dim)
        self.act_dim = int(act_dim)
        self.net = Mlp([self.obs_dim, *hidden, 2 * self.act_dim], rng, final_scale=final_scale)

    def params(self):
        return self.net.params()

    def sample(self, obs: np.ndarray, xi: np.ndarray):
        """Reparametrized draw ``a = tanh(mu + sigma * xi)``.

        ``obs`` is (B, obs_dim) and ``xi`` (B, act_dim) of standard-normal
        noise supplied by the caller; keeping the noise external makes the
        whole pass a deterministic function, which the finite-difference
        tests and seeded training both rely on.  Returns
        ``(action, log_prob, cache)`` with log_prob of shape (B,).
        """
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out, net_cache = self.net.forward(obs)
        mu = out[:, : self.act_dim]
        raw = out[:, self.act_dim :]
        log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
        sigma = np.exp(log_std)
        u = mu + sigma * xi
        action = np.tanh(u)
        corr = 2.0 * (_LOG_2 - u - _softplus(-2.0 * u))
        logp = (-0.5 * xi**2 - log_std - 0.5 * _LOG_2PI - corr).sum(axis=1)
        cache = (net_cache, raw, sigma, xi, action)
        return action, logp, cache

    def backward(self, cache, d_action: np.ndarray, d_logprob: np.ndarray):
        """Gradients of ``sum(d_action * action) + sum(d_logprob * log_prob)``.

        ``d_action`` is (B, act_dim), ``d_logprob`` (B,).  Returns gradients
        ordered like ``params()``.
        """
        net_cache, raw, sigma, xi, action = cache
        dlp = np.asarray(d_logprob, dtype=float)[:, None]
        # d log_prob / du = 2 * tanh(u); d action / du = 1 - tanh(u)^2
        du = d_action * (1.0 - action**2) + dlp * (2.0 * action)
        dmu = du
        # u = mu + exp(log_std) * xi, and log_prob carries an explicit
        # -log_std per dimension.
        dls = du * (sigma * xi) - dlp
        clamp_mask = (raw > LOG_STD_MIN) & (raw < LOG_STD_MAX)
        dls_raw = np.where(clamp_mask, dls, 0.0)
        dout = np.concatenate([dmu, dls_raw], axis=1)
        grads, _ = self.net.backward(net_cache, dout)
        return grads

    def deterministic(self, obs: np.ndarray) -> np.ndarray:
        """Mean action ``tanh(mu)`` used for evaluation."""
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        out, _ = self.net.forward(obs)
        return np.tanh(out[:, : self.act_dim])

    def log_prob_of(self, obs: np.ndarray, action: np.ndarray) -> np.ndarray:
        """Log-density of given squashed actions (for tests and diagnostics)."""
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        action = np.atleast_2d(np.asarray(action, dtype=float))
        out, _ = self.net.forward(obs)
        mu = out[:, : self.act_dim]
        log_std = np.clip(out[:, self.act_dim :], LOG_STD_MIN, LOG_STD_MAX)
        sigma = np.exp(log_std)
        u = np.arctanh(np.clip(action, -1.0 + 1e-12, 1.0 - 1e-12))
        xi = (u - mu) / sigma
        corr = 2.0 * (_LOG_2 - u - _softplus(-2.0 * u))
        return (-0.5 * xi**2 - log_std - 0.5 * _LOG_2PI - corr).sum(axis=1)
