"""Population container and the ask/tell interface every selector implements."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..commands import CommandBounds, ObjectiveSpace, is_degenerate, sample_uniform
from .operators import gaussian_mutation, uniform_crossover
from .schedule import OperatorSchedule


class SelectorStateError(RuntimeError):
    pass


@dataclass
class Individual:
    command: np.ndarray
    fitness: np.ndarray | None
    birth: int
    mean_positive_reward: float = float("nan")

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass
class Population:
    commands: np.ndarray
    fitness: np.ndarray
    mean_positive_reward: np.ndarray
    birth: np.ndarray
    generation: int = 0

    def __len__(self) -> int:
        return self.commands.shape[0]

    def __iter__(self) -> Iterator[Individual]:
        for i in range(len(self)):
            f = self.fitness[i]
            yield Individual(self.commands[i], None if np.isnan(f).any() else f,
                             int(self.birth[i]), float(self.mean_positive_reward[i]))

    @property
    def evaluated(self) -> bool:
        return not np.isnan(self.fitness).any()

    def take(self, idx) -> "Population":
        idx = np.asarray(idx, dtype=int)
        return Population(self.commands[idx], self.fitness[idx], self.mean_positive_reward[idx],
                          self.birth[idx], self.generation)

    @staticmethod
    def concat(a: "Population", b: "Population") -> "Population":
        return Population(np.concatenate([a.commands, b.commands]), np.concatenate([a.fitness, b.fitness]),
                          np.concatenate([a.mean_positive_reward, b.mean_positive_reward]),
                          np.concatenate([a.birth, b.birth]), max(a.generation, b.generation))

    @classmethod
    def unevaluated(cls, commands: np.ndarray, n_objectives: int, generation: int) -> "Population":
        n = commands.shape[0]
        return cls(commands.copy(), np.full((n, n_objectives), np.nan), np.full(n, np.nan),
                   np.full(n, generation, dtype=int), generation)

    def with_fitness(self, fitness, mean_positive_reward) -> "Population":
        return Population(self.commands, np.asarray(fitness, dtype=float).copy(),
                          np.asarray(mean_positive_reward, dtype=float).copy(), self.birth, self.generation)


class Selector:
    """Ask/tell curriculum selector.

    ``ask`` returns the ``n`` commands to train on this generation; ``tell``
    receives their fitness (``(n, d + 1)``) and mean positive rewards and
    advances the generation counter. ``population`` is the set the selector
    would hand back as its best trade-offs.
    """
    name = "base"

    def __init__(self, bounds: CommandBounds, n: int, schedule: OperatorSchedule,
                 rng: np.random.Generator, space: ObjectiveSpace | None = None):
        if n < 1:
            raise ValueError("population size must be >= 1")
        self.bounds = bounds
        self.n = n
        self.schedule = schedule
        self.rng = rng
        self.space = space or ObjectiveSpace(bounds.dims)
        self.generation = 0
        self._pending: Population | None = None

    @property
    def n_objectives(self) -> int:
        return self.space.n_objectives

    def ask(self) -> np.ndarray:
        if self._pending is None:
            self._pending = Population.unevaluated(self._propose(), self.n_objectives, self.generation)
        return self._pending.commands.copy()

    def tell(self, commands, fitness, mean_positive_reward) -> None:
        if self._pending is None:
            raise SelectorStateError("tell() without a pending ask()")
        if not np.array_equal(np.asarray(commands, dtype=float), self._pending.commands):
            raise SelectorStateError("told commands differ from the asked ones")
        fitness = np.asarray(fitness, dtype=float)
        if fitness.shape != (self.n, self.n_objectives) or np.isnan(fitness).any():
            raise SelectorStateError(f"fitness must be a complete ({self.n}, {self.n_objectives}) array")
        evaluated = self._pending.with_fitness(fitness, mean_positive_reward)
        self._pending = None
        self._absorb(evaluated)
        self.generation += 1

    def population(self) -> Population:
        raise NotImplementedError

    def _propose(self) -> np.ndarray:
        raise NotImplementedError

    def _absorb(self, evaluated: Population) -> None:
        raise NotImplementedError

    def random_commands(self, n: int) -> np.ndarray:
        return sample_uniform(self.bounds, n, self.rng)

    def vary(self, a, b) -> np.ndarray:
        """Crossover then mutation with the operator rates in force this generation."""
        pc, pm, strength = self.schedule.lookup(self.generation)
        child = uniform_crossover(a, b, pc, self.rng)
        child = gaussian_mutation(child, pm, strength, self.bounds, self.rng)
        if is_degenerate(child, self.bounds):
            child = gaussian_mutation(child, 1.0, strength, self.bounds, self.rng)
        return child
