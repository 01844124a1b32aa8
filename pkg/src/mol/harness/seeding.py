"""Independent random streams derived from one master seed.

``stream(seed, kind, *index)`` builds ``SeedSequence(seed, spawn_key=(kind_id, *index))``.
Each consumer gets its own key, so the numbers a simulation sees depend only
on (seed, generation, rollout, command index), never on scheduling order:

==========  =====================================  =========================
kind        index                                  used for
==========  =====================================  =========================
init        ()                                     network initialization
selector    ()                                     command sampling/variation
noise       (generation, rollout, command)         exploration noise
update      (generation, rollout, chunk)           minibatch shuffling
==========  =====================================  =========================
"""
from __future__ import annotations

import numpy as np

KINDS = {"init": 0, "selector": 1, "noise": 2, "update": 3}


def stream(seed: int, kind: str, *index: int) -> np.random.Generator:
    key = (KINDS[kind], *(int(i) for i in index))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def exploration_noise(seed: int, generation: int, rollout: int, commands, steps: int, act_dim: int) -> np.ndarray:
    """Standard-normal noise ``(len(commands), steps, act_dim)``, one stream per command index."""
    return np.stack([
        stream(seed, "noise", generation, rollout, i).standard_normal((steps, act_dim))
        for i in commands
    ])
