"""Plain numpy building blocks: MLP with manual backprop, Adam, running stats."""

from __future__ import annotations

import numpy as np

__all__ = ["Mlp", "Adam", "RunningNorm", "soft_update"]


class Mlp:
    """Fully connected net, ReLU hidden layers, linear output.

    Parameters are float64 arrays; ``params()`` returns them in a stable
    order (W1, b1, W2, b2, ...) shared with ``backward`` gradients, so an
    optimizer can zip the two lists.
    """

    def __init__(self, sizes, rng: np.random.Generator, *, final_scale: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        if len(self.sizes) < 2:
            raise ValueError(f"need at least input and output sizes, got {sizes}")
        self.weights = []
        self.biases = []
        last = len(self.sizes) - 2
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            b = rng.uniform(-bound, bound, size=fan_out)
            if i == last and final_scale != 1.0:
                w *= final_scale
                b *= final_scale
            self.weights.append(w)
            self.biases.append(b)

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def forward(self, x: np.ndarray):
        """Returns ``(output, cache)``; feed the cache to ``backward``."""
        h = x
        hiddens = [x]
        masks = []
        n = len(self.weights)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i < n - 1:
                mask = z > 0.0
                h = np.where(mask, z, 0.0)
                masks.append(mask)
                hiddens.append(h)
            else:
                h = z
        return h, (hiddens, masks)

    def backward(self, cache, dout: np.ndarray, *, input_grad_cols=None):
        """Backprop ``dout`` through the cached forward pass.

        Returns ``(grads, dx)`` with grads ordered like ``params()``.  ``dx``
        is only computed when ``input_grad_cols`` is given: a slice object
        restricting which input columns are needed (computing the rest is
        wasted work in the actor update, where only the action block of the
        critic input matters).
        """
        hiddens, masks = cache
        grads = [None] * (2 * len(self.weights))
        d = dout
        for i in range(len(self.weights) - 1, -1, -1):
            grads[2 * i] = hiddens[i].T @ d
            grads[2 * i + 1] = d.sum(axis=0)
            if i > 0:
                d = (d @ self.weights[i].T) * masks[i - 1]
        dx = None
        if input_grad_cols is not None:
            dx = d @ self.weights[0][input_grad_cols, :].T
        return grads, dx


class Adam:
    """Adam with bias correction, updating parameter arrays in place."""

    def __init__(self, params, lr: float, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.b1, self.b2 = betas
        self.eps = float(eps)
        self.t = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        if len(grads) != len(self.params):
            raise ValueError(f"expected {len(self.params)} gradients, got {len(grads)}")
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * np.square(g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


class RunningNorm:
    """Streaming mean/variance (parallel Welford) for observation scaling.

    Starts from a tiny pseudo-count so ``normalize`` is well defined before
    the first update.  The statistics are plain arrays so a checkpoint can
    freeze and restore them exactly.
    """

    def __init__(self, dim: int, eps: float = 1e-8):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 1e-4
        self.eps = float(eps)

    def update(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        batch_count = x.shape[0]
        batch_mean = x.mean(axis=0)
        batch_var = x.var(axis=0)
        total = self.count + batch_count
        delta = batch_mean - self.mean
        m2 = (
            self.var * self.count
            + batch_var * batch_count
            + delta**2 * self.count * batch_count / total
        )
        self.mean = self.mean + delta * batch_count / total
        self.var = m2 / total
        self.count = total

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / np.sqrt(self.var + self.eps)

    def state(self):
        return {"mean": self.mean.tolist(), "var": self.var.tolist(), "count": self.count}

    @classmethod
    def from_state(cls, state, eps: float = 1e-8):
        mean = np.asarray(state["mean"], dtype=float)
        out = cls(mean.size, eps)
        out.mean = mean
        out.var = np.asarray(state["var"], dtype=float)
        out.count = float(state["count"])
        return out


def soft_update(target_params, online_params, tau: float):
    """Polyak averaging, in place: ``t = (1 - tau) * t + tau * p``."""
    for t, p in zip(target_params, online_params):
        t *= 1.0 - tau
        t += tau * p
