"""Fully connected networks with hand-written backpropagation."""
from __future__ import annotations

import numpy as np


class CorruptedModelError(RuntimeError):
    pass


_ACTIVATIONS = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "linear": (lambda x: x, lambda y: np.ones_like(y)),
}


class MLP:
    """``len(sizes) - 1`` dense layers, tanh between them.

    Derivatives are expressed in terms of each layer's output, so the cache
    holds the input and the post-activation of every layer.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None,
                 output_activation: str = "linear", output_scale: float = 1.0,
                 hidden_activation: str = "tanh"):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        rng = np.random.default_rng(0) if rng is None else rng
        self.params: list[np.ndarray] = []
        n_layers = len(self.sizes) - 1
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            scale = np.sqrt(1.0 / fan_in) * (output_scale if i == n_layers - 1 else 1.0)
            self.params.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.params.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def _act(self, layer: int):
        name = self.output_activation if layer == self.n_layers - 1 else self.hidden_activation
        return _ACTIVATIONS[name]

    def forward(self, x: np.ndarray):
        x = np.asarray(x, dtype=float)
        cache = [x]
        h = x
        for i in range(self.n_layers):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            h = self._act(i)[0](h @ w + b)
            cache.append(h)
        return h, cache

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray) -> list[np.ndarray]:
        grads = [None] * len(self.params)
        g = grad_out
        for i in reversed(range(self.n_layers)):
            g = g * self._act(i)[1](cache[i + 1])
            grads[2 * i] = cache[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            if i:
                g = g @ self.params[2 * i].T
        return grads

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {flat.size}")
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def check_finite(self) -> None:
        if not all(np.all(np.isfinite(p)) for p in self.params):
            raise CorruptedModelError("network parameters contain non-finite values")

    def copy(self) -> "MLP":
        twin = type(self).__new__(type(self))
        twin.__dict__.update(self.__dict__)
        twin.params = [p.copy() for p in self.params]
        return twin


class PolicyNetwork(MLP):
    """Observation to bounded action mean, with a fixed Gaussian exploration std."""

    def __init__(self, obs_dim: int, act_dim: int, hidden=(64, 64), std: float = 0.5,
                 rng: np.random.Generator | None = None):
        super().__init__((obs_dim, *hidden, act_dim), rng, output_activation="tanh", output_scale=0.1)
        self.std = float(std)

    def mean_action(self, obs: np.ndarray) -> np.ndarray:
        return self(obs)

    def log_prob(self, raw_action: np.ndarray, mean: np.ndarray) -> np.ndarray:
        z = (raw_action - mean) / self.std
        d = raw_action.shape[-1]
        return -0.5 * np.sum(z * z, axis=-1) - d * np.log(self.std) - 0.5 * d * np.log(2 * np.pi)

    def act(self, obs: np.ndarray, rng: np.random.Generator | None = None, explore: bool = True):
        """Return ``(clamped action, raw action, log-prob of raw)``."""
        self.check_finite()
        mean = self.mean_action(obs)
        raw = mean + self.std * rng.standard_normal(mean.shape) if explore else mean
        return np.clip(raw, -1.0, 1.0), raw, self.log_prob(raw, mean)


class ValueNetwork(MLP):
    def __init__(self, obs_dim: int, hidden=(64, 64), rng: np.random.Generator | None = None):
        super().__init__((obs_dim, *hidden, 1), rng, output_activation="linear")

    def value(self, obs: np.ndarray) -> np.ndarray:
        return self(obs)[..., 0]
