"""Variation operators shared by the evolutionary selectors."""
from __future__ import annotations

import numpy as np

from ..commands import EPSILON_MIN, CommandBounds, is_degenerate

MAX_RESAMPLES = 1000


def uniform_crossover(a, b, p: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``p``, take each component from ``b`` with probability 1/2; else return ``a``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not 0.0 <= p <= 1.0:
        raise ValueError("crossover probability must be in [0, 1]")
    if rng.random() >= p:
        return a.copy()
    return np.where(rng.random(a.shape) < 0.5, b, a)


def gaussian_mutation(c, p: float, strength: float, bounds: CommandBounds,
                      rng: np.random.Generator, eps: float = EPSILON_MIN) -> np.ndarray:
    """Binomial per-component Gaussian perturbation, clamped to ``bounds``.

    Noise std is ``strength`` times the half-range of each axis. A mutant
    that lands in the degenerate ball around the origin is redrawn.
    """
    c = np.asarray(c, dtype=float)
    if not 0.0 <= p <= 1.0:
        raise ValueError("mutation probability must be in [0, 1]")
    if strength <= 0:
        raise ValueError("mutation strength must be > 0")
    std = strength * bounds.half_range
    for _ in range(MAX_RESAMPLES):
        hit = rng.random(c.shape) < p
        if not hit.any():
            return c.copy()
        out = bounds.clip(np.where(hit, c + rng.normal(0.0, 1.0, c.shape) * std, c))
        if not is_degenerate(out, bounds, eps):
            return out
    raise RuntimeError("could not draw a non-degenerate mutant")
