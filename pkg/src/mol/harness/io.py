"""On-disk layout of a trial directory.

::

    config.yaml            resolved ExperimentConfig
    rollouts.csv           generation, rollout, mean_reward
    population.csv         generation, vx, vy, wz, f1..f4, mean_positive_reward
    metrics.csv            trial, index, metric, value, scenario, selector
    eval_test_grid.csv     vx, vy, wz, achieved_vx, achieved_vy, achieved_wz, distance,
    eval_population.csv      mean_positive_reward, faulted
    checkpoint.npz         learner parameters (see save_checkpoint)
    summary.json           TrialResult
    manifest.json          artifact list, config hash, creation time

Floats are written with ``repr`` so files round-trip exactly and two runs
with the same seed produce identical bytes. Only ``manifest.json`` carries
a timestamp.
"""
from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import numpy as np

from ..ppo import PolicyNetwork, ValueNetwork
from .config import ExperimentConfig, dump_config

CONFIG = "config.yaml"
ROLLOUTS = "rollouts.csv"
POPULATION = "population.csv"
METRICS = "metrics.csv"
EVAL_GRID = "eval_test_grid.csv"
EVAL_POPULATION = "eval_population.csv"
CHECKPOINT = "checkpoint.npz"
SUMMARY = "summary.json"
MANIFEST = "manifest.json"

CHECKPOINT_VERSION = 1
METRIC_COLUMNS = ["trial", "index", "metric", "value", "scenario", "selector"]
EVAL_COLUMNS = ["vx", "vy", "wz", "achieved_vx", "achieved_vy", "achieved_wz", "distance",
                "mean_positive_reward", "faulted"]


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def population_columns(n_objectives: int) -> list[str]:
    return ["generation", "vx", "vy", "wz", *[f"f{i + 1}" for i in range(n_objectives)], "mean_positive_reward"]


def write_config(cfg: ExperimentConfig, out: Path) -> None:
    dump_config(cfg, out / CONFIG)


def write_rollouts(path: Path, rows) -> None:
    write_csv(path, ["generation", "rollout", "mean_reward"], rows)


def write_population(path: Path, rows, n_objectives: int) -> None:
    write_csv(path, population_columns(n_objectives), rows)


def write_metrics(path: Path, rows) -> None:
    write_csv(path, METRIC_COLUMNS, rows)


def write_eval(path: Path, records) -> None:
    write_csv(path, EVAL_COLUMNS, (
        (*r.command.tolist(), *r.achieved.tolist(), r.distance, r.mean_positive_reward, r.faulted)
        for r in records
    ))


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: Path):
    with open(path) as fh:
        return json.load(fh)


def write_manifest(out: Path, config_hash: str) -> None:
    files = sorted(p.name for p in out.iterdir() if p.is_file() and p.name != MANIFEST)
    write_json(out / MANIFEST, {"config_hash": config_hash, "artifacts": files,
                                "created": time.strftime("%Y-%m-%dT%H:%M:%S%z")})


def save_checkpoint(path: Path, learner, config_hash: str) -> None:
    """``npz`` with ``actor_{i}`` / ``critic_{i}`` parameter arrays (weights then bias per layer),
    ``actor_sizes``, ``critic_sizes``, ``std``, ``version`` and ``config_hash``.
    """
    arrays = {f"actor_{i}": p for i, p in enumerate(learner.actor.params)}
    arrays.update({f"critic_{i}": p for i, p in enumerate(learner.critic.params)})
    np.savez(path, version=np.array(CHECKPOINT_VERSION), config_hash=np.array(config_hash),
             actor_sizes=np.array(learner.actor.sizes), critic_sizes=np.array(learner.critic.sizes),
             std=np.array(learner.actor.std), **arrays)


def load_checkpoint(path: Path) -> tuple[PolicyNetwork, ValueNetwork, str]:
    with np.load(path) as z:
        if int(z["version"]) != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {int(z['version'])}")
        a_sizes = [int(s) for s in z["actor_sizes"]]
        c_sizes = [int(s) for s in z["critic_sizes"]]
        actor = PolicyNetwork(a_sizes[0], a_sizes[-1], a_sizes[1:-1], float(z["std"]))
        critic = ValueNetwork(c_sizes[0], c_sizes[1:-1])
        for i, p in enumerate(actor.params):
            p[...] = z[f"actor_{i}"]
        for i, p in enumerate(critic.params):
            p[...] = z[f"critic_{i}"]
        return actor, critic, str(z["config_hash"])


def last_population(path: Path) -> np.ndarray:
    rows = read_csv(path)
    last = max(int(r["generation"]) for r in rows)
    return np.array([[float(r["vx"]), float(r["vy"]), float(r["wz"])]
                     for r in rows if int(r["generation"]) == last])
