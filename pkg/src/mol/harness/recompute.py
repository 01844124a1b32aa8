"""Recompute trial metrics from the logged files alone."""
from __future__ import annotations

import math
from pathlib import Path

from ..metrics import quadrant_density
from . import io


def _column_mean(path: Path, column: str) -> float:
    values = [float(r[column]) for r in io.read_csv(path)]
    return math.fsum(values) / len(values)


def recompute_trial(trial_dir: str | Path) -> dict:
    """Metrics rebuilt from the CSV logs, keyed like ``summary.json``."""
    d = Path(trial_dir)
    return {
        "test_grid_mean_distance": _column_mean(d / io.EVAL_GRID, "distance"),
        "population_mean_distance": _column_mean(d / io.EVAL_POPULATION, "distance"),
        "quadrant_density": quadrant_density(io.last_population(d / io.POPULATION)),
        "rollout_mean_rewards": [float(r["mean_reward"]) for r in io.read_csv(d / io.ROLLOUTS)],
    }


def check_trial(trial_dir: str | Path) -> dict[str, tuple]:
    """``{metric: (logged, recomputed)}`` for every metric that disagrees."""
    d = Path(trial_dir)
    logged = io.read_json(d / io.SUMMARY)
    return {k: (logged[k], v) for k, v in recompute_trial(d).items() if logged[k] != v}
