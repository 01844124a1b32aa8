"""Central-difference verification of the hand-written gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .learner import Batch, ppo_loss
from .networks import MLP, PolicyNetwork, ValueNetwork

MAX_CHECK_PARAMS = 2000


@dataclass
class GradCheckReport:
    max_rel_error: float
    max_abs_error: float
    n_params: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: {self.n_params} params, max rel err {self.max_rel_error:.3e} "
                f"(tol {self.tolerance:.0e}), max abs err {self.max_abs_error:.3e}")


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)


def gradient_check(params: list[np.ndarray], loss_and_grads: Callable[[], tuple[float, list]],
                   tolerance: float = 1e-4, h: float = 1e-5) -> GradCheckReport:
    """Compare analytic gradients of every entry of ``params`` with central differences.

    ``loss_and_grads`` must read the arrays in ``params`` (they are perturbed
    in place and restored).
    """
    n = sum(p.size for p in params)
    if n >= MAX_CHECK_PARAMS:
        raise ValueError(f"gradient check limited to < {MAX_CHECK_PARAMS} parameters, got {n}")
    _, grads = loss_and_grads()
    analytic = np.concatenate([g.ravel() for g in grads])
    numeric = np.empty(n)
    k = 0
    for p in params:
        flat = p.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_and_grads()[0]
            flat[i] = orig - h
            down = loss_and_grads()[0]
            flat[i] = orig
            numeric[k] = (up - down) / (2 * h)
            k += 1
    rel = relative_error(analytic, numeric)
    return GradCheckReport(float(rel.max()), float(np.abs(analytic - numeric).max()), n, tolerance)


def mse_check(net: MLP, x: np.ndarray, y: np.ndarray, tolerance: float = 1e-4) -> GradCheckReport:
    def fn():
        out, cache = net.forward(x)
        diff = out - y
        return float(np.mean(diff * diff)), net.backward(cache, 2.0 * diff / diff.size)
    return gradient_check(net.params, fn, tolerance)


def random_ppo_instance(rng: np.random.Generator, obs_dim: int = 6, act_dim: int = 3,
                        hidden=(8, 8), n: int = 3, clip: float = 0.2):
    """Small actor, critic and batch with ratios spread across both clip boundaries."""
    actor = PolicyNetwork(obs_dim, act_dim, hidden, 0.5, rng)
    critic = ValueNetwork(obs_dim, hidden, rng)
    for p in actor.params + critic.params:
        p += rng.normal(0.0, 0.3, size=p.shape)
    obs = rng.normal(size=(n, obs_dim))
    mean = actor.mean_action(obs)
    actions = mean + 0.5 * rng.normal(size=mean.shape)
    logp = actor.log_prob(actions, mean)
    old = logp - rng.uniform(-2.5 * clip, 2.5 * clip, size=n)
    batch = Batch(obs, actions, old, rng.normal(size=n), rng.normal(size=n))
    return actor, critic, batch


def ppo_gradient_check(seed: int = 0, tolerance: float = 1e-4, **kw) -> GradCheckReport:
    rng = np.random.default_rng(seed)
    actor, critic, batch = random_ppo_instance(rng, **kw)
    clip = kw.get("clip", 0.2)

    def fn():
        stats, ga, gc = ppo_loss(actor, critic, batch, clip)
        return stats.total, ga + gc

    return gradient_check(actor.params + critic.params, fn, tolerance)
