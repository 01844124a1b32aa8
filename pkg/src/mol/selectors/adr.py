"""Automatic domain randomization over the command box, plus the uniform baseline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..commands import CommandBounds, is_degenerate, sample_uniform
from .base import Population, Selector, SelectorStateError
from .nsga2 import ShadowArchive

LOW, HIGH = 0, 1


@dataclass
class ADRState:
    """Per-axis sampling intervals that widen at edges where the learner succeeds.

    Buffers are keyed by ``(axis, side)`` with side ``0`` for the lower edge
    and ``1`` for the upper edge.
    """
    bounds: CommandBounds
    lo: np.ndarray
    hi: np.ndarray
    buffer_size: int = 10
    threshold: float = 1.4
    step_fraction: float = 0.05
    boundary_prob: float = 0.5
    buffers: dict = field(default_factory=dict)

    @classmethod
    def initial(cls, bounds: CommandBounds, width_fraction: float = 0.2, **kw) -> "ADRState":
        center = (bounds.lo + bounds.hi) / 2.0
        half = width_fraction * (bounds.hi - bounds.lo) / 2.0
        return cls(bounds, center - half, center + half, **kw)

    @property
    def step(self) -> np.ndarray:
        return self.step_fraction * (self.bounds.hi - self.bounds.lo)

    def sample(self, n: int, rng: np.random.Generator):
        """``n`` commands and, per command, the pinned ``(axis, side)`` or ``None``."""
        cmds = np.empty((n, self.bounds.dims))
        tags: list[tuple[int, int] | None] = []
        for i in range(n):
            while True:
                c = rng.uniform(self.lo, self.hi)
                tag = None
                if rng.random() < self.boundary_prob:
                    axis = int(rng.integers(self.bounds.dims))
                    side = int(rng.integers(2))
                    c[axis] = self.hi[axis] if side == HIGH else self.lo[axis]
                    tag = (axis, side)
                if not is_degenerate(c, self.bounds):
                    break
            cmds[i] = c
            tags.append(tag)
        return cmds, tags

    def record(self, tags, performance) -> None:
        for tag, perf in zip(tags, performance):
            if tag is None:
                continue
            buf = self.buffers.setdefault(tag, [])
            buf.append(float(perf))
            if len(buf) >= self.buffer_size:
                if np.mean(buf) >= self.threshold:
                    self._expand(*tag)
                buf.clear()

    def _expand(self, axis: int, side: int) -> None:
        if side == HIGH:
            self.hi[axis] = min(self.hi[axis] + self.step[axis], self.bounds.hi[axis])
        else:
            self.lo[axis] = max(self.lo[axis] - self.step[axis], self.bounds.lo[axis])


def adr_sample_and_update(state: ADRState, tags, performance, n: int, rng: np.random.Generator):
    """Fold the last boundary results into the buffers, then draw ``n`` new commands."""
    state.record(tags, performance)
    cmds, new_tags = state.sample(n, rng)
    return cmds, new_tags, state


class ADRSelector(Selector):
    name = "adr"

    def __init__(self, *args, adr: dict | None = None, **kw):
        super().__init__(*args, **kw)
        adr = dict(adr or {})
        width = adr.pop("initial_width", 0.2)
        self.adr = ADRState.initial(self.bounds, width, **adr)
        self.archive = ShadowArchive(self.n)
        self._tags: list = []

    def _propose(self) -> np.ndarray:
        cmds, self._tags = self.adr.sample(self.n, self.rng)
        return cmds

    def _absorb(self, evaluated: Population) -> None:
        self.adr.record(self._tags, evaluated.mean_positive_reward)
        self.archive.add(evaluated)
        self.archive.pop.generation = self.generation + 1

    def population(self) -> Population:
        if self.archive.pop is None:
            raise SelectorStateError("no evaluated population yet")
        return self.archive.pop


class RandomSelector(Selector):
    name = "random"

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.archive = ShadowArchive(self.n)

    def _propose(self) -> np.ndarray:
        return self.random_commands(self.n)

    def _absorb(self, evaluated: Population) -> None:
        self.archive.add(evaluated)
        self.archive.pop.generation = self.generation + 1

    def population(self) -> Population:
        if self.archive.pop is None:
            raise SelectorStateError("no evaluated population yet")
        return self.archive.pop


def random_select(bounds: CommandBounds, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return sample_uniform(bounds, n, rng)
