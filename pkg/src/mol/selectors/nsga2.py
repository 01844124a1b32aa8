"""NSGA-II: non-dominated sorting with crowding-distance survival. Higher fitness is better."""
from __future__ import annotations

import numpy as np

from .base import Population, Selector, SelectorStateError


def dominates(a, b) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return bool(np.all(a >= b) and np.any(a > b))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is true when row ``i`` dominates row ``j``."""
    ge = np.all(F[:, None, :] >= F[None, :, :], axis=-1)
    gt = np.any(F[:, None, :] > F[None, :, :], axis=-1)
    return ge & gt


def fast_non_dominated_sort(F) -> list[list[int]]:
    try:
        F = np.asarray(F, dtype=float)
    except ValueError:
        raise ValueError("fitness vectors must all have the same length") from None
    if F.ndim != 2:
        raise ValueError("expected a list of fitness vectors")
    n = F.shape[0]
    if n == 0:
        return []
    D = dominance_matrix(F)
    dominated_by = D.sum(axis=0)
    fronts = []
    current = [i for i in range(n) if dominated_by[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for p in current:
            for q in np.nonzero(D[p])[0]:
                dominated_by[q] -= 1
                if dominated_by[q] == 0:
                    nxt.append(int(q))
        current = sorted(nxt)
    return fronts


def crowding_distance(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        lo, hi = F[order[0], k], F[order[-1], k]
        dist[order[0]] = dist[order[-1]] = np.inf
        if hi == lo:
            continue
        gaps = (F[order[2:], k] - F[order[:-2], k]) / (hi - lo)
        dist[order[1:-1]] += gaps
    return dist


def rank_and_crowding(F) -> tuple[np.ndarray, np.ndarray]:
    F = np.asarray(F, dtype=float)
    rank = np.empty(F.shape[0], dtype=int)
    crowd = np.empty(F.shape[0])
    for r, front in enumerate(fast_non_dominated_sort(F)):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def survival(F, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors ordered by (front rank, crowding distance descending)."""
    F = np.asarray(F, dtype=float)
    keep: list[int] = []
    for front in fast_non_dominated_sort(F):
        if len(keep) + len(front) <= n:
            keep.extend(front)
            if len(keep) == n:
                break
            continue
        crowd = crowding_distance(F[front])
        order = np.argsort(-crowd, kind="stable")
        keep.extend(front[i] for i in order[: n - len(keep)])
        break
    return np.asarray(keep, dtype=int)


def nsga2_next_generation(pop: Population, offspring: Population) -> Population:
    if not (pop.evaluated and offspring.evaluated):
        raise SelectorStateError("survival selection needs evaluated individuals")
    combined = Population.concat(pop, offspring)
    return combined.take(survival(combined.fitness, len(pop)))


def binary_tournament(rank: np.ndarray, crowd: np.ndarray, rng: np.random.Generator) -> int:
    i, j = rng.integers(len(rank), size=2)
    if rank[i] != rank[j]:
        return int(i if rank[i] < rank[j] else j)
    return int(i if crowd[i] >= crowd[j] else j)


class NSGA2Selector(Selector):
    name = "nsga2"

    def __init__(self, *args, **kw):
        super().__init__(*args, **kw)
        self.pop: Population | None = None

    def _propose(self) -> np.ndarray:
        if self.pop is None:
            return self.random_commands(self.n)
        rank, crowd = rank_and_crowding(self.pop.fitness)
        kids = np.empty((self.n, self.bounds.dims))
        for i in range(self.n):
            a = self.pop.commands[binary_tournament(rank, crowd, self.rng)]
            b = self.pop.commands[binary_tournament(rank, crowd, self.rng)]
            kids[i] = self.vary(a, b)
        return kids

    def _absorb(self, evaluated: Population) -> None:
        if self.pop is None:
            self.pop = evaluated
        else:
            self.pop = nsga2_next_generation(self.pop, evaluated)
        self.pop.generation = self.generation + 1

    def population(self) -> Population:
        if self.pop is None:
            raise SelectorStateError("no evaluated population yet")
        return self.pop


class ShadowArchive:
    """NSGA-II survival over everything a non-evolutionary selector has evaluated.

    Only used to report a population set; it never feeds back into sampling.
    """

    def __init__(self, n: int):
        self.n = n
        self.pop: Population | None = None

    def add(self, evaluated: Population) -> None:
        if self.pop is None:
            self.pop = evaluated.take(survival(evaluated.fitness, self.n))
        else:
            self.pop = nsga2_next_generation(self.pop, evaluated)
