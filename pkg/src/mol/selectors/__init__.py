"""Curriculum selectors: which commands the learner trains on next."""
from __future__ import annotations

import numpy as np

from ..commands import CommandBounds, ObjectiveSpace
from .adr import ADRSelector, ADRState, RandomSelector, adr_sample_and_update, random_select
from .base import Individual, Population, Selector, SelectorStateError
from .moead import MOEADSelector, moead_step, tchebycheff, weight_vectors
from .nsga2 import (
    NSGA2Selector,
    ShadowArchive,
    crowding_distance,
    dominates,
    fast_non_dominated_sort,
    nsga2_next_generation,
    survival,
)
from .operators import gaussian_mutation, uniform_crossover
from .schedule import MUTATION_PROBABILITY, MUTATION_STRENGTH, OperatorSchedule, schedule_lookup

SELECTORS = {
    "nsga2": NSGA2Selector,
    "moead": MOEADSelector,
    "adr": ADRSelector,
    "random": RandomSelector,
}


def make_selector(name: str, bounds: CommandBounds, n: int, schedule: OperatorSchedule,
                  rng: np.random.Generator, space: ObjectiveSpace | None = None, **options) -> Selector:
    try:
        cls = SELECTORS[name]
    except KeyError:
        raise ValueError(f"unknown selector {name!r}; choose from {sorted(SELECTORS)}") from None
    return cls(bounds, n, schedule, rng, space, **options)
