"""Experiment configuration, presets and YAML round-tripping."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from ..commands import CommandBounds
from ..ppo import TrainerConfig
from ..reward import RewardConfig
from ..selectors import SELECTORS, OperatorSchedule
from ..surrogate import SCENARIOS, ScenarioSpec, get_scenario


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str | dict = "nominal"
    selector: str = "nsga2"
    population: int = 20
    rollouts: int = 6
    updates_per_rollout: int = 2
    generations: int | None = 40
    steps: int = 200
    total_simulations: int | None = None
    schedule: OperatorSchedule = OperatorSchedule()
    scale_schedule: bool = True
    trainer: TrainerConfig = TrainerConfig()
    bounds: CommandBounds = CommandBounds()
    reward: RewardConfig | None = None
    selector_options: dict = field(default_factory=dict)
    grid_points: int = 5
    settle_fraction: float = 0.1
    seed: int = 0
    trials: int = 1

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise ConfigError(f"unknown selector {self.selector!r}; choose from {sorted(SELECTORS)}")
        try:
            get_scenario(self.scenario)
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        for name in ("population", "rollouts", "updates_per_rollout", "steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.updates_per_rollout > self.population:
            raise ConfigError("updates_per_rollout cannot exceed the population size")
        per_gen = self.population * self.rollouts
        if self.generations is None:
            if self.total_simulations is None:
                raise ConfigError("give generations or total_simulations")
            if self.total_simulations % per_gen:
                raise ConfigError(f"total_simulations {self.total_simulations} is not a multiple of "
                                  f"population*rollouts = {per_gen}")
            object.__setattr__(self, "generations", self.total_simulations // per_gen)
        elif self.total_simulations is not None and self.total_simulations != per_gen * self.generations:
            raise ConfigError(f"population*rollouts*generations = {per_gen * self.generations} "
                              f"!= total_simulations {self.total_simulations}")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.reward is None:
            object.__setattr__(self, "reward", RewardConfig.for_bounds(self.bounds))

    @property
    def simulations_per_generation(self) -> int:
        return self.population * self.rollouts

    @property
    def budget(self) -> int:
        return self.simulations_per_generation * self.generations

    @property
    def scenario_spec(self) -> ScenarioSpec:
        return get_scenario(self.scenario)

    @property
    def scenario_name(self) -> str:
        return self.scenario_spec.name

    def effective_schedule(self) -> OperatorSchedule:
        return self.schedule.scaled_to(self.generations) if self.scale_schedule else self.schedule

    def effective_trainer(self) -> TrainerConfig:
        if self.trainer.lr_decay_at is not None:
            return self.trainer
        return replace(self.trainer, lr_decay_at=(2 * self.budget) // 3)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario if isinstance(self.scenario, str) else dict(self.scenario),
            "selector": self.selector,
            "population": self.population,
            "rollouts": self.rollouts,
            "updates_per_rollout": self.updates_per_rollout,
            "generations": self.generations,
            "steps": self.steps,
            "total_simulations": self.total_simulations,
            "schedule": self.schedule.to_dict(),
            "scale_schedule": self.scale_schedule,
            "trainer": self.trainer.to_dict(),
            "bounds": self.bounds.to_dict(),
            "reward": self.reward.to_dict(),
            "selector_options": dict(self.selector_options),
            "grid_points": self.grid_points,
            "settle_fraction": self.settle_fraction,
            "seed": self.seed,
            "trials": self.trials,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "schedule" in d and isinstance(d["schedule"], dict):
            d["schedule"] = OperatorSchedule.from_dict(d["schedule"])
        if "trainer" in d and isinstance(d["trainer"], dict):
            d["trainer"] = TrainerConfig.from_dict(d["trainer"])
        if "bounds" in d and isinstance(d["bounds"], dict):
            d["bounds"] = CommandBounds.from_dict(d["bounds"])
        if d.get("reward") is not None and isinstance(d["reward"], dict):
            d["reward"] = RewardConfig.from_dict(d["reward"])
        return cls(**d)

    def hash(self) -> str:
        """Digest of everything that affects results (``seed`` and ``trials`` excluded)."""
        d = self.to_dict()
        d.pop("seed")
        d.pop("trials")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        merged = self.to_dict()
        for key, value in kw.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != "scenario":
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        # reward bounds follow the command bounds unless given explicitly
        if "bounds" in kw and "reward" not in kw:
            merged["reward"] = None
        return ExperimentConfig.from_dict(merged)


PRESETS: dict[str, dict] = {
    "desk": {},
    "smoke": {"population": 8, "rollouts": 2, "generations": 3, "steps": 50,
              "trainer": {"minibatch": 128, "epochs": 2}},
    "full": {"population": 50, "rollouts": 6, "updates_per_rollout": 2, "generations": None,
              "total_simulations": 45_000, "steps": 400},
}


def preset(name: str, **overrides) -> ExperimentConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ExperimentConfig().with_overrides(**base).with_overrides(**overrides)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a YAML config; an optional top-level ``preset`` key names the base layer."""
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    base = raw.pop("preset", "desk")
    return preset(base, **raw)


def dump_config(cfg: ExperimentConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=True)


def scenario_names() -> list[str]:
    return sorted(SCENARIOS)
