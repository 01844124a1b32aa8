"""Actor-critic PPO with n-step return targets."""
from __future__ import annotations

from dataclasses import dataclass, asdict, field

import numpy as np

from .networks import PolicyNetwork, ValueNetwork
from .optim import Adam


class TrainingFault(RuntimeError):
    """Non-finite loss during an update; parameters are left as before the update."""


@dataclass(frozen=True)
class TrainerConfig:
    n_step: int = 4
    gamma: float = 0.99
    clip: float = 0.2
    lr: float = 3e-4
    lr_final: float = 1e-4
    # simulation count at which lr switches to lr_final; None = derived by the harness
    lr_decay_at: int | None = None
    std: float = 0.5
    epochs: int = 4
    minibatch: int = 256
    actor_hidden: tuple[int, ...] = (64, 64)
    critic_hidden: tuple[int, ...] = (64, 64)
    value_coef: float = 0.5

    def __post_init__(self):
        if self.clip <= 0:
            raise ValueError("clip must be > 0")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")
        object.__setattr__(self, "actor_hidden", tuple(self.actor_hidden))
        object.__setattr__(self, "critic_hidden", tuple(self.critic_hidden))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["actor_hidden"] = list(self.actor_hidden)
        d["critic_hidden"] = list(self.critic_hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainerConfig":
        return cls(**d)


def nstep_returns(rewards, values, n: int = 4, gamma: float = 0.99) -> np.ndarray:
    """n-step bootstrapped targets, no bootstrap past the episode end.

    ``rewards`` and ``values`` are ``(T,)`` or ``(B, T)``.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must have the same shape")
    T = rewards.shape[-1]
    out = np.zeros_like(rewards)
    for i in range(min(n, T)):
        out[..., : T - i] += gamma**i * rewards[..., i:]
    if n < T:
        out[..., : T - n] += gamma**n * values[..., n:]
    return out


@dataclass
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    returns: np.ndarray
    advantages: np.ndarray

    def __len__(self):
        return self.obs.shape[0]

    def take(self, idx) -> "Batch":
        return Batch(self.obs[idx], self.actions[idx], self.log_probs[idx],
                     self.returns[idx], self.advantages[idx])


@dataclass
class LossStats:
    actor_loss: float
    critic_loss: float
    clip_fraction: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.actor_loss + self.critic_loss


def ppo_loss(actor: PolicyNetwork, critic: ValueNetwork, batch: Batch, clip: float,
             value_coef: float = 0.5, with_grads: bool = True):
    """Clipped-surrogate actor loss plus weighted squared-error critic loss.

    Returns ``(LossStats, actor_grads, critic_grads)``; gradients are ``None``
    when ``with_grads`` is false.
    """
    n = len(batch)
    mean, a_cache = actor.forward(batch.obs)
    logp = actor.log_prob(batch.actions, mean)
    ratio = np.exp(logp - batch.log_probs)
    adv = batch.advantages
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
    actor_loss = -np.mean(np.minimum(unclipped, clipped))

    v, c_cache = critic.forward(batch.obs)
    err = v[:, 0] - batch.returns
    critic_loss = value_coef * np.mean(err * err)

    stats = LossStats(float(actor_loss), float(critic_loss),
                      float(np.mean(np.abs(ratio - 1.0) > clip)))
    if not with_grads:
        return stats, None, None

    # min() routes the gradient through the unclipped branch wherever it is the smaller one
    active = unclipped <= clipped
    d_logp = np.where(active, -ratio * adv, 0.0) / n
    d_mean = d_logp[:, None] * (batch.actions - mean) / actor.std**2
    actor_grads = actor.backward(a_cache, d_mean)
    critic_grads = critic.backward(c_cache, (2.0 * value_coef / n) * err[:, None])
    return stats, actor_grads, critic_grads


class PPOLearner:
    def __init__(self, obs_dim: int, act_dim: int, cfg: TrainerConfig = TrainerConfig(),
                 rng: np.random.Generator | None = None):
        rng = np.random.default_rng(0) if rng is None else rng
        self.cfg = cfg
        self.actor = PolicyNetwork(obs_dim, act_dim, cfg.actor_hidden, cfg.std, rng)
        self.critic = ValueNetwork(obs_dim, cfg.critic_hidden, rng)
        self.actor_opt = Adam(self.actor.params, cfg.lr)
        self.critic_opt = Adam(self.critic.params, cfg.lr)
        self.simulations_seen = 0
        self.updates = 0

    @property
    def policy(self) -> PolicyNetwork:
        return self.actor

    @property
    def n_params(self) -> tuple[int, int]:
        return self.actor.n_params, self.critic.n_params

    def current_lr(self) -> float:
        at = self.cfg.lr_decay_at
        if at is not None and self.simulations_seen >= at:
            return self.cfg.lr_final
        return self.cfg.lr

    def act(self, obs, rng=None, explore: bool = True):
        return self.actor.act(obs, rng, explore)

    def make_batch(self, traj) -> Batch:
        """Flatten the non-faulted simulations of a trajectory into a training batch."""
        keep = ~traj.faulted
        obs = traj.observations[keep]
        values = self.critic.value(obs)
        returns = nstep_returns(traj.rl_rewards[keep], values, self.cfg.n_step, self.cfg.gamma)
        adv = (returns - values).ravel()
        if adv.size > 1 and adv.std() > 0:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        d = obs.shape[-1]
        return Batch(obs.reshape(-1, d), traj.actions[keep].reshape(-1, traj.actions.shape[-1]),
                     traj.log_probs[keep].ravel(), returns.ravel(), adv)

    def update(self, batch: Batch, rng: np.random.Generator) -> LossStats:
        if len(batch) == 0:
            raise ValueError("empty batch")
        lr = self.current_lr()
        self.actor_opt.lr = lr
        self.critic_opt.lr = lr
        snapshot = self.state_dict()
        a_sum = c_sum = f_sum = 0.0
        count = 0
        mb = self.cfg.minibatch
        for _ in range(self.cfg.epochs):
            order = rng.permutation(len(batch))
            for start in range(0, len(batch), mb):
                part = batch.take(order[start:start + mb])
                stats, ga, gc = ppo_loss(self.actor, self.critic, part, self.cfg.clip, self.cfg.value_coef)
                if not np.isfinite(stats.total):
                    self.load_state_dict(snapshot)
                    raise TrainingFault(f"non-finite PPO loss at update {self.updates}")
                self.actor_opt.step(ga)
                self.critic_opt.step(gc)
                a_sum += stats.actor_loss
                c_sum += stats.critic_loss
                f_sum += stats.clip_fraction
                count += 1
        self.updates += 1
        return LossStats(a_sum / count, c_sum / count, f_sum / count)

    def state_dict(self) -> dict:
        return {
            "actor": [p.copy() for p in self.actor.params],
            "critic": [p.copy() for p in self.critic.params],
            "actor_opt": self.actor_opt.state_dict(),
            "critic_opt": self.critic_opt.state_dict(),
            "simulations_seen": self.simulations_seen,
            "updates": self.updates,
        }

    def load_state_dict(self, state: dict) -> None:
        for dst, src in zip(self.actor.params, state["actor"]):
            dst[...] = src
        for dst, src in zip(self.critic.params, state["critic"]):
            dst[...] = src
        self.actor_opt.load_state_dict(state["actor_opt"])
        self.critic_opt.load_state_dict(state["critic_opt"])
        self.simulations_seen = state["simulations_seen"]
        self.updates = state["updates"]
