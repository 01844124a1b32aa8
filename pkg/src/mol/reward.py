"""Reward terms and the multi-objective fitness conversion.

The positive part scores how closely achieved body velocities follow the
commanded ones; it feeds both the RL reward and the selector fitness. The
negative part penalizes posture, height and joint-speed deviations.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .commands import (
    CommandBounds,
    ObjectiveSpace,
    angle_between,
    normalize_command,
    project_to_sphere,
)


class RewardConfigError(ValueError):
    pass


class SimulationFault(RuntimeError):
    """Non-finite quantity produced by (or fed into) the simulator."""


@dataclass(frozen=True)
class RewardFeature:
    value: float
    min: float
    max: float
    invert: bool = False
    exponent: float = 2.0


def _normalized_feature(value, lo, hi, invert, exponent):
    if not lo < hi:
        raise RewardConfigError(f"feature bounds need min < max, got [{lo}, {hi}]")
    if exponent < 1:
        raise RewardConfigError(f"feature exponent must be >= 1, got {exponent}")
    norm = (np.clip(value, lo, hi) - lo) / (hi - lo)
    return (1.0 - norm) ** exponent if invert else norm ** exponent


def feature_reward(f: RewardFeature) -> float:
    return float(_normalized_feature(f.value, f.min, f.max, f.invert, f.exponent))


@dataclass(frozen=True)
class FeatureSpec:
    max: float
    exponent: float = 2.0
    min: float = 0.0

    def __call__(self, value, invert: bool):
        return _normalized_feature(value, self.min, self.max, invert, self.exponent)


@dataclass(frozen=True)
class RewardConfig:
    """Bounds and exponents of every reward feature.

    ``magnitude.max`` is twice the largest per-axis command magnitude, so 2.0
    for the default unit box.
    """
    angle: FeatureSpec = FeatureSpec(max=float(np.pi))
    magnitude: FeatureSpec = FeatureSpec(max=2.0)
    posture: FeatureSpec = FeatureSpec(max=1.0)
    height: FeatureSpec = FeatureSpec(max=0.6)
    joint_speed: FeatureSpec = FeatureSpec(max=3.0)

    @classmethod
    def for_bounds(cls, bounds: CommandBounds, **overrides) -> "RewardConfig":
        base = cls(magnitude=FeatureSpec(max=2.0 * bounds.max_axis_magnitude))
        return cls.from_dict({**base.to_dict(), **overrides}) if overrides else base

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RewardConfig":
        return cls(**{k: v if isinstance(v, FeatureSpec) else FeatureSpec(**v) for k, v in d.items()})


@dataclass
class StepOutcome:
    """Per-step measurements; every field may carry a leading batch axis."""
    velocity: np.ndarray
    posture: np.ndarray = field(default_factory=lambda: np.zeros(()))
    height: np.ndarray = field(default_factory=lambda: np.zeros(()))
    joint_speed: np.ndarray = field(default_factory=lambda: np.zeros(()))


def positive_reward(command, achieved, cfg: RewardConfig = RewardConfig()) -> np.ndarray:
    """Command-similarity reward in ``[0, 2]``: direction term plus magnitude term.

    A zero achieved velocity has no direction and is scored at the worst
    angle, pi.
    """
    command = np.asarray(command, dtype=float)
    achieved = np.asarray(achieved, dtype=float)
    if not np.all(np.isfinite(achieved)):
        raise SimulationFault("achieved velocities are not finite")
    c_norm = np.linalg.norm(command, axis=-1)
    a_norm = np.linalg.norm(achieved, axis=-1)
    moving = a_norm > 1e-12
    safe_a = np.where(moving[..., None], achieved, 1.0) / np.where(moving, a_norm, np.sqrt(achieved.shape[-1]))[..., None]
    angle = np.where(moving, angle_between(command / c_norm[..., None], safe_a), np.pi)
    r_angle = cfg.angle(angle, invert=True)
    r_mag = cfg.magnitude(np.abs(c_norm - a_norm), invert=True)
    return r_angle + r_mag


def negative_reward(outcome: StepOutcome, cfg: RewardConfig = RewardConfig()) -> np.ndarray:
    """Sum of three penalties in ``[-3, 0]``; zero deviation costs nothing."""
    channels = (outcome.posture, outcome.height, outcome.joint_speed)
    if not all(np.all(np.isfinite(ch)) for ch in channels):
        raise SimulationFault("penalty channels are not finite")
    return -(
        cfg.posture(outcome.posture, invert=False)
        + cfg.height(outcome.height, invert=False)
        + cfg.joint_speed(outcome.joint_speed, invert=False)
    )


def rl_reward(command, outcome: StepOutcome, cfg: RewardConfig = RewardConfig()) -> np.ndarray:
    return positive_reward(command, outcome.velocity, cfg) + negative_reward(outcome, cfg)


def mo_fitness(command, r, space: ObjectiveSpace = ObjectiveSpace(),
               bounds: CommandBounds = CommandBounds()) -> np.ndarray:
    """Spread a scalar positive reward over the simplex objectives.

    Each component is ``r`` scaled by the command direction's angular
    closeness to one vertex, reaching zero at the inter-vertex angle.
    ``command`` may be ``(d,)`` with scalar ``r`` or ``(n, d)`` with ``(n,)``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValueError("positive reward must be finite and non-negative")
    p = project_to_sphere(normalize_command(command, bounds))
    angles = angle_between(p[..., None, :], space.vertices)
    closeness = 1.0 - np.minimum(angles, space.max_angle) / space.max_angle
    return closeness * r[..., None]
