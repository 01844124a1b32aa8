"""MOEA/D with Tchebycheff decomposition, maximization form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .base import Population, Selector, SelectorStateError


def tchebycheff(f, weights, ideal) -> float:
    f = np.asarray(f, dtype=float)
    weights = np.asarray(weights, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    if not f.shape[-1] == weights.shape[-1] == ideal.shape[-1]:
        raise ValueError("fitness, weights and ideal point must have the same dimension")
    return np.max(weights * np.abs(ideal - f), axis=-1)


def simplex_lattice(m: int, h: int) -> np.ndarray:
    """All weight vectors with ``m`` components in ``{0, 1/h, ..., 1}`` summing to one."""
    rows = [c for c in itertools.product(range(h + 1), repeat=m) if sum(c) == h]
    return np.asarray(sorted(rows, reverse=True), dtype=float) / h


def weight_vectors(n: int, m: int) -> np.ndarray:
    """Exactly ``n`` lattice weight vectors.

    Uses the smallest lattice with at least ``n`` points and thins it by
    farthest-point selection seeded with the unit corners (ties go to the
    lower lattice index). Rows come back in lattice order.
    """
    h = 1
    while comb(h + m - 1, m - 1) < n:
        h += 1
    lattice = simplex_lattice(m, h)
    if len(lattice) == n:
        return lattice
    corners = [int(np.argmax(lattice[:, k])) for k in range(m)]
    chosen = corners[:n]
    dist = np.min(np.linalg.norm(lattice[:, None, :] - lattice[None, chosen, :], axis=-1), axis=1)
    while len(chosen) < n:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(lattice - lattice[nxt], axis=-1))
    return lattice[sorted(chosen)]


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    d = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=-1)
    return np.argsort(d, axis=1, kind="stable")[:, : min(t, len(weights))]


@dataclass
class MOEADState:
    weights: np.ndarray
    neighbors: np.ndarray
    pop: Population
    ideal: np.ndarray


def moead_step(state: MOEADState, offspring: Population, pools: list[np.ndarray],
               rng: np.random.Generator, max_replace: int = 2) -> MOEADState:
    """Raise the ideal point, then let each child replace up to ``max_replace``
    members of its mating pool whose Tchebycheff value it strictly improves.
    """
    if not offspring.evaluated:
        raise SelectorStateError("offspring must be evaluated")
    state.ideal = np.maximum(state.ideal, offspring.fitness.max(axis=0))
    pop = state.pop
    for i in range(len(offspring)):
        child = offspring.fitness[i]
        replaced = 0
        for j in rng.permutation(pools[i]):
            lam = state.weights[j]
            if tchebycheff(child, lam, state.ideal) < tchebycheff(pop.fitness[j], lam, state.ideal):
                pop.commands[j] = offspring.commands[i]
                pop.fitness[j] = child
                pop.mean_positive_reward[j] = offspring.mean_positive_reward[i]
                pop.birth[j] = offspring.birth[i]
                replaced += 1
                if replaced >= max_replace:
                    break
    return state


class MOEADSelector(Selector):
    name = "moead"

    def __init__(self, *args, neighborhood: int = 5, delta: float = 0.9, max_replace: int = 2, **kw):
        super().__init__(*args, **kw)
        self.weights = weight_vectors(self.n, self.n_objectives)
        self.neighbors = neighborhoods(self.weights, neighborhood)
        self.delta = delta
        self.max_replace = max_replace
        self.state: MOEADState | None = None
        self._pools: list[np.ndarray] = []

    def _propose(self) -> np.ndarray:
        if self.state is None:
            return self.random_commands(self.n)
        pop = self.state.pop
        everyone = np.arange(self.n)
        kids = np.empty((self.n, self.bounds.dims))
        self._pools = []
        for i in range(self.n):
            pool = self.neighbors[i] if self.rng.random() < self.delta else everyone
            self._pools.append(pool)
            a, b = self.rng.choice(pool, size=2, replace=len(pool) < 2)
            kids[i] = self.vary(pop.commands[a], pop.commands[b])
        return kids

    def _absorb(self, evaluated: Population) -> None:
        if self.state is None:
            self.state = MOEADState(self.weights, self.neighbors, evaluated,
                                    evaluated.fitness.max(axis=0))
        else:
            moead_step(self.state, evaluated, self._pools, self.rng, self.max_replace)
        self.state.pop.generation = self.generation + 1

    @property
    def ideal(self) -> np.ndarray:
        if self.state is None:
            raise SelectorStateError("no evaluated population yet")
        return self.state.ideal

    def population(self) -> Population:
        if self.state is None:
            raise SelectorStateError("no evaluated population yet")
        return self.state.pop
