"""Run a matrix of trials and aggregate their results.

Directory layout under ``out``::

    <variant>/<scenario>-<selector>-s<seed>/   one trial directory each
    failures.json                               trials that raised, if any
    suite_summary.csv / suite_summary.json      mean and sample std per cell
    plot_distance.csv                           bar data for both evaluation sets
    plot_reward.csv                             mean reward per generation
    plot_density.csv                            quadrant density per generation

Aggregation reads only the per-trial files, so ``aggregate(out)`` can be
re-run at any time and reproduces the summary exactly.
"""
from __future__ import annotations

import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..selectors.schedule import MUTATION_PROBABILITY, MUTATION_STRENGTH
from . import io
from .config import ConfigError, ExperimentConfig
from .trial import run_trial, trial_id

log = logging.getLogger(__name__)

WORKERS_ENV = "MOL_WORKERS"
DEFAULT_VARIANT = "default"
SUMMARY_METRICS = ("test_grid_mean_distance", "population_mean_distance", "quadrant_density",
                   "final_mean_reward")


@dataclass(frozen=True)
class TrialSpec:
    variant: str
    config: ExperimentConfig
    seed: int
    out: Path


def mutation_variants() -> dict[str, dict]:
    """Mutation probability x strength presets, e.g. ``P-08_S-10``."""
    return {f"{p}_{s}": {"schedule": {"mutation": list(MUTATION_PROBABILITY[p]),
                                      "strength": list(MUTATION_STRENGTH[s])}}
            for p in MUTATION_PROBABILITY for s in MUTATION_STRENGTH}


def rollout_variants(budget: int) -> dict[str, dict]:
    """Rollouts per generation x updates per rollout at a fixed simulation budget."""
    return {f"R{m}_U{u}": {"rollouts": m, "updates_per_rollout": u,
                           "generations": None, "total_simulations": budget}
            for m in (2, 4, 6) for u in (1, 2)}


SUITES = {
    "baseline": dict(scenarios=("nominal", "limited", "back", "run"),
                     selectors=("nsga2", "moead", "adr", "random")),
    "mutation": dict(scenarios=("nominal",), selectors=("nsga2",), variants="mutation"),
    "rollout": dict(scenarios=("nominal",), selectors=("nsga2",), variants="rollout"),
}


def suite_matrix(name: str, base: ExperimentConfig) -> dict:
    """Keyword arguments for ``expand_matrix`` for a named suite preset."""
    try:
        spec = dict(SUITES[name])
    except KeyError:
        raise ConfigError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    kind = spec.pop("variants", None)
    if kind == "mutation":
        spec["variants"] = mutation_variants()
    elif kind == "rollout":
        spec["variants"] = rollout_variants(base.budget)
    return spec


def expand_matrix(base: ExperimentConfig, scenarios, selectors, seeds, out: str | Path,
                  variants: dict[str, dict] | None = None) -> list[TrialSpec]:
    scenarios, selectors, seeds = list(scenarios), list(selectors), list(seeds)
    variants = dict(variants) if variants else {DEFAULT_VARIANT: {}}
    if not (scenarios and selectors and seeds and variants):
        raise ConfigError("suite matrix is empty")
    out = Path(out)
    specs = []
    for vname, overrides in variants.items():
        for scenario in scenarios:
            for selector in selectors:
                cfg = base.with_overrides(scenario=scenario, selector=selector, **overrides)
                for seed in seeds:
                    specs.append(TrialSpec(vname, cfg, int(seed), out / vname / trial_id(cfg, seed)))
    return specs


def _run_one(spec: TrialSpec):
    try:
        run_trial(spec.config, spec.seed, spec.out)
        return spec, None
    except Exception as exc:  # recorded, excluded from aggregates
        return spec, f"{type(exc).__name__}: {exc}"


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def run_suite(base: ExperimentConfig, scenarios, selectors, seeds, out: str | Path = "results",
              variants: dict[str, dict] | None = None, workers: int | None = None) -> list[dict]:
    """Run every trial of the matrix, then aggregate. Returns the summary rows."""
    specs = expand_matrix(base, scenarios, selectors, seeds, out, variants)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    n = worker_count(workers)
    log.info("suite: %d trials on %d worker(s)", len(specs), n)
    if n == 1:
        results = [_run_one(s) for s in specs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_run_one, specs))
    failures = [{"variant": s.variant, "trial": s.out.name, "seed": s.seed, "error": err}
                for s, err in results if err]
    for f in failures:
        log.warning("trial %s/%s failed and is excluded: %s", f["variant"], f["trial"], f["error"])
    if failures:
        io.write_json(out / "failures.json", failures)
    return aggregate(out)


def _stats(values: list[float]) -> tuple[float, float, int]:
    n = len(values)
    mean = math.fsum(values) / n
    std = float(np.std(values, ddof=1)) if n > 1 else float("nan")
    return mean, std, n


def _trial_dirs(out: Path):
    for summary in sorted(out.glob(f"*/*/{io.SUMMARY}")):
        yield summary.parent.parent.name, summary.parent


def _generation_means(trial_dir: Path, metric: str) -> dict[int, float]:
    if metric == "mean_reward":
        rows = io.read_csv(trial_dir / io.ROLLOUTS)
        by_gen = defaultdict(list)
        for r in rows:
            by_gen[int(r["generation"])].append(float(r["mean_reward"]))
        return {g: math.fsum(v) / len(v) for g, v in by_gen.items()}
    rows = io.read_csv(trial_dir / io.METRICS)
    return {int(r["index"]): float(r["value"]) for r in rows if r["metric"] == metric}


def aggregate(out: str | Path) -> list[dict]:
    """Summarize every completed trial below ``out`` per (variant, scenario, selector)."""
    out = Path(out)
    cells: dict[tuple, list[dict]] = defaultdict(list)
    curves: dict[tuple, dict[str, list[dict]]] = defaultdict(lambda: defaultdict(list))
    for variant, trial_dir in _trial_dirs(out):
        s = io.read_json(trial_dir / io.SUMMARY)
        key = (variant, s["scenario"], s["selector"])
        reward = _generation_means(trial_dir, "mean_reward")
        s["final_mean_reward"] = reward[max(reward)]
        cells[key].append(s)
        curves[key]["mean_reward"].append(reward)
        curves[key]["quadrant_density"].append(_generation_means(trial_dir, "quadrant_density"))
    if not cells:
        raise ConfigError(f"no completed trials under {out}")

    summary = []
    for (variant, scenario, selector), trials in sorted(cells.items()):
        row = {"variant": variant, "scenario": scenario, "selector": selector, "trials": len(trials),
               "seeds": sorted(t["seed"] for t in trials)}
        for metric in SUMMARY_METRICS:
            mean, std, _ = _stats([t[metric] for t in trials])
            row[f"{metric}_mean"] = mean
            row[f"{metric}_std"] = std
        summary.append(row)

    columns = ["variant", "scenario", "selector", "trials"] + [
        f"{m}_{s}" for m in SUMMARY_METRICS for s in ("mean", "std")]
    io.write_csv(out / "suite_summary.csv", columns, ([r[c] for c in columns] for r in summary))
    io.write_json(out / "suite_summary.json", _json_safe(summary))

    dist_rows = []
    for r in summary:
        for eval_set, metric in (("test_grid", "test_grid_mean_distance"),
                                 ("population", "population_mean_distance")):
            dist_rows.append((r["variant"], r["scenario"], r["selector"], eval_set,
                              r[f"{metric}_mean"], r[f"{metric}_std"], r["trials"]))
    io.write_csv(out / "plot_distance.csv",
                 ["variant", "scenario", "selector", "eval_set", "mean", "std", "n"], dist_rows)

    for metric, fname in (("mean_reward", "plot_reward.csv"), ("quadrant_density", "plot_density.csv")):
        rows = []
        for (variant, scenario, selector), per_trial in sorted(curves.items()):
            series = per_trial[metric]
            for g in sorted(set().union(*series)):
                mean, std, n = _stats([s[g] for s in series if g in s])
                rows.append((variant, scenario, selector, g, mean, std, n))
        io.write_csv(out / fname, ["variant", "scenario", "selector", "generation", "mean", "std", "n"], rows)
    return summary


def _json_safe(rows):
    def fix(v):
        return None if isinstance(v, float) and math.isnan(v) else v
    return [{k: fix(v) for k, v in r.items()} for r in rows]
