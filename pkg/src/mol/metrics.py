"""Evaluation metrics: mean reward, mean distance and quadrant mean density."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .commands import CommandBounds, as_commands, is_degenerate
from .surrogate import simulate

SETTLE_FRACTION = 0.1
N_OCTANTS = 8


class MetricError(ValueError):
    pass


@dataclass
class EvaluationSet:
    kind: str
    commands: np.ndarray
    excluded: int = 0

    def __len__(self):
        return self.commands.shape[0]


def evaluation_grid(bounds: CommandBounds = CommandBounds(), points: int = 5) -> EvaluationSet:
    """Regular ``points^d`` lattice over the bounds, degenerate points dropped and counted."""
    axes = [np.linspace(lo, hi, points) for lo, hi in zip(bounds.low, bounds.high)]
    grid = np.array(list(itertools.product(*axes)))
    degenerate = is_degenerate(grid, bounds)
    return EvaluationSet("test-grid", grid[~degenerate], int(degenerate.sum()))


def population_set(commands) -> EvaluationSet:
    return EvaluationSet("population", as_commands(commands).copy())


def mean_reward(trajectories) -> float:
    """Mean per-step RL reward over every step of every trajectory.

    Accepts trajectory objects (``rl_rewards`` of shape ``(B, T)``) or plain
    reward arrays.
    """
    parts = trajectories if isinstance(trajectories, (list, tuple)) else [trajectories]
    arrays = [np.ravel(getattr(t, "rl_rewards", t)) for t in parts]
    if not arrays or sum(a.size for a in arrays) == 0:
        raise MetricError("mean reward needs at least one step")
    flat = np.concatenate(arrays)
    return float(flat.mean())


def mean_distance(expected, achieved) -> float:
    expected = as_commands(expected)
    achieved = as_commands(achieved)
    if expected.shape != achieved.shape or expected.shape[0] == 0:
        raise MetricError(f"need equally many expected and achieved commands, got "
                          f"{expected.shape[0]} and {achieved.shape[0]}")
    # fsum gives a correctly rounded total, independent of summation order
    return math.fsum(np.linalg.norm(achieved - expected, axis=1).tolist()) / expected.shape[0]


def octant_index(commands) -> np.ndarray:
    """Octant id in ``0..7`` from component signs; zero counts as positive."""
    c = as_commands(commands)
    bits = (c < 0).astype(int)
    return bits @ (1 << np.arange(c.shape[1]))


def quadrant_density(commands, n_octants: int = N_OCTANTS) -> float:
    c = as_commands(commands)
    if c.shape[0] == 0:
        raise MetricError("quadrant density needs at least one command")
    counts = np.bincount(octant_index(c), minlength=n_octants)
    expected = c.shape[0] / n_octants
    return math.fsum((np.minimum(counts, expected) / expected).tolist()) / n_octants


@dataclass
class CommandRecord:
    command: np.ndarray
    achieved: np.ndarray
    distance: float
    mean_positive_reward: float
    faulted: bool


def evaluate_controller(policy, eval_set, scenario, steps: int, seed=None,
                        bounds: CommandBounds = CommandBounds(),
                        settle_fraction: float = SETTLE_FRACTION):
    """Noise-free rollout of every command; returns ``(mean distance, records)``.

    Faulted simulations are charged the box diagonal as their distance.
    ``seed`` is unused because evaluation is deterministic.
    """
    cmds = eval_set.commands if isinstance(eval_set, EvaluationSet) else as_commands(eval_set)
    traj = simulate(policy, cmds, scenario, steps, noise=None)
    achieved = traj.mean_velocity(settle_fraction)
    dist = np.linalg.norm(achieved - cmds, axis=1)
    dist = np.where(traj.faulted | ~np.isfinite(dist), bounds.diagonal, dist)
    mpr = traj.mean_positive_reward
    records = [CommandRecord(cmds[i], achieved[i], float(dist[i]), float(mpr[i]), bool(traj.faulted[i]))
               for i in range(len(cmds))]
    return math.fsum(dist.tolist()) / len(dist), records
