from __future__ import annotations

from dataclasses import dataclass, asdict, replace

import numpy as np

FULL_GENERATIONS = 150

MUTATION_PROBABILITY = {
    "P-08": (0.8, 0.6, 0.4),
    "P-1": (1.0, 0.8, 0.6),
}
MUTATION_STRENGTH = {
    "S-05": (0.05, 0.025, 0.005),
    "S-10": (0.1, 0.05, 0.01),
    "S-15": (0.15, 0.075, 0.03),
}


@dataclass(frozen=True)
class OperatorSchedule:
    """Piecewise schedule of crossover probability, mutation probability and mutation strength."""
    breakpoints: tuple[float, ...] = (0, 50, 100)
    crossover: tuple[float, ...] = (0.5, 0.3, 0.0)
    mutation: tuple[float, ...] = (0.8, 0.6, 0.4)
    strength: tuple[float, ...] = (0.1, 0.05, 0.01)
    interpolate: bool = False

    def __post_init__(self):
        for name in ("breakpoints", "crossover", "mutation", "strength"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        n = len(self.breakpoints)
        if not n or any(len(getattr(self, k)) != n for k in ("crossover", "mutation", "strength")):
            raise ValueError("schedule lists must be non-empty and of equal length")
        if self.breakpoints[0] != 0 or any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if any(not 0.0 <= p <= 1.0 for p in self.crossover + self.mutation):
            raise ValueError("probabilities must lie in [0, 1]")
        if any(s <= 0 for s in self.strength):
            raise ValueError("mutation strengths must be > 0")

    def lookup(self, generation: float) -> tuple[float, float, float]:
        """``(crossover p, mutation p, mutation strength)`` in force at ``generation``."""
        if generation < 0:
            raise ValueError("generation must be >= 0")
        if self.interpolate:
            return tuple(float(np.interp(generation, self.breakpoints, getattr(self, k)))
                         for k in ("crossover", "mutation", "strength"))
        i = int(np.searchsorted(self.breakpoints, generation, side="right")) - 1
        return self.crossover[i], self.mutation[i], self.strength[i]

    def scaled_to(self, generations: int) -> "OperatorSchedule":
        """Stretch breakpoints from the 150-generation layout to ``generations``."""
        if generations == FULL_GENERATIONS:
            return self
        factor = generations / FULL_GENERATIONS
        return replace(self, breakpoints=tuple(b * factor for b in self.breakpoints))

    def with_presets(self, probability: str | None = None, strength: str | None = None) -> "OperatorSchedule":
        out = self
        if probability:
            out = replace(out, mutation=MUTATION_PROBABILITY[probability])
        if strength:
            out = replace(out, strength=MUTATION_STRENGTH[strength])
        return out

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorSchedule":
        return cls(**d)


def schedule_lookup(s: OperatorSchedule, generation: float) -> tuple[float, float, float]:
    return s.lookup(generation)
