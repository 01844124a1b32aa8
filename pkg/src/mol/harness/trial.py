"""The curriculum training loop: generations of selection, rollouts and PPO updates."""
from __future__ import annotations

import logging
import pickle
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..commands import ObjectiveSpace
from ..metrics import evaluate_controller, evaluation_grid, mean_reward, population_set, quadrant_density
from ..ppo import PPOLearner, TrainingFault
from ..reward import mo_fitness
from ..selectors import Selector, make_selector
from ..surrogate import N_ACTUATORS, OBS_DIM, Trajectory, simulate
from . import io
from .config import ExperimentConfig
from .seeding import exploration_noise, stream

log = logging.getLogger(__name__)

STATE_FILE = "state.pkl"


class TrialAborted(RuntimeError):
    pass


@dataclass
class GenerationReport:
    generation: int
    commands: np.ndarray
    rollout_mean_rewards: list[float]
    mean_positive_reward: np.ndarray
    fitness: np.ndarray
    simulations: int
    updates: int
    loss: list = field(default_factory=list)


def run_generation(selector: Selector, learner, config: ExperimentConfig, generation: int,
                   seed: int = 0, simulate_fn=simulate) -> GenerationReport:
    """Train on one population of commands for ``config.rollouts`` rollouts.

    Each rollout simulates every command once with exploration. The
    commands are split into ``updates_per_rollout`` contiguous chunks and
    the learner updates after each chunk, so later chunks run on the updated
    policy. Fitness comes from the last rollout.
    """
    commands = selector.ask()
    n = commands.shape[0]
    chunks = np.array_split(np.arange(n), config.updates_per_rollout)
    scenario = config.scenario_spec
    rollout_rewards: list[float] = []
    losses = []
    sims = updates = 0
    last: Trajectory | None = None
    for r in range(config.rollouts):
        parts = []
        for c, idx in enumerate(chunks):
            noise = exploration_noise(seed, generation, r, idx, config.steps, N_ACTUATORS)
            traj = simulate_fn(learner.policy, commands[idx], scenario, config.steps, noise, config.reward)
            sims += len(idx)
            learner.simulations_seen += len(idx)
            batch = learner.make_batch(traj)
            if len(batch):
                losses.append(learner.update(batch, stream(seed, "update", generation, r, c)))
                updates += 1
            parts.append(traj)
        last = Trajectory.concatenate(parts)
        rollout_rewards.append(mean_reward(last))

    mpr = np.where(last.faulted, 0.0, last.mean_positive_reward)
    fitness = mo_fitness(commands, mpr, selector.space, config.bounds)
    selector.tell(commands, fitness, mpr)
    return GenerationReport(generation, commands, rollout_rewards, mpr, fitness, sims, updates, losses)


@dataclass
class TrialLog:
    rollouts: list = field(default_factory=list)      # (generation, rollout, mean_reward)
    population: list = field(default_factory=list)    # (generation, vx, vy, wz, f1.., mpr)
    metrics: list = field(default_factory=list)       # MetricRecord rows
    simulations: int = 0
    updates: int = 0


@dataclass
class TrialResult:
    trial_id: str
    config_hash: str
    seed: int
    scenario: str
    selector: str
    generations: int
    simulations: int
    updates: int
    rollout_mean_rewards: list
    test_grid_mean_distance: float
    test_grid_excluded: int
    population_mean_distance: float
    quadrant_density: float
    faulted_commands: int
    population_dump: str
    checkpoint: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def build(config: ExperimentConfig, seed: int):
    space = ObjectiveSpace(config.bounds.dims)
    selector = make_selector(config.selector, config.bounds, config.population, config.effective_schedule(),
                             stream(seed, "selector"), space, **config.selector_options)
    learner = PPOLearner(OBS_DIM, N_ACTUATORS, config.effective_trainer(), stream(seed, "init"))
    return selector, learner


def trial_id(config: ExperimentConfig, seed: int) -> str:
    return f"{config.scenario_name}-{config.selector}-s{seed}"


def run_trial(config: ExperimentConfig, seed: int | None = None, out: str | Path = "results",
              resume: bool = False, stop_after: int | None = None) -> TrialResult | None:
    """Run all generations, evaluate, and write the trial directory ``out``.

    With ``resume`` the loop restarts after the last completed generation
    found in ``out/state.pkl``. ``stop_after`` halts (without evaluating)
    once that many generations are done, which is how interruption is
    exercised in tests; it returns ``None`` in that case.
    """
    seed = config.seed if seed is None else seed
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    tid = trial_id(config, seed)
    chash = config.hash()
    io.write_config(config, out)

    state_path = out / STATE_FILE
    if resume and state_path.exists():
        with open(state_path, "rb") as fh:
            state = pickle.load(fh)
        if state["config_hash"] != chash or state["seed"] != seed:
            raise TrialAborted(f"{state_path} belongs to a different config or seed")
        selector, learner = state["selector"], build(config, seed)[1]
        learner.load_state_dict(state["learner"])
        tlog, start = state["log"], state["generation"]
        log.info("%s: resuming after generation %d", tid, start)
    else:
        selector, learner = build(config, seed)
        tlog, start = TrialLog(), 0
        log.info("%s: actor/critic parameters %s", tid, learner.n_params)

    for g in range(start, config.generations):
        try:
            rep = run_generation(selector, learner, config, g, seed)
        except TrainingFault as exc:
            io.write_json(out / "fault.json", {"trial": tid, "generation": g, "error": str(exc)})
            raise TrialAborted(f"{tid}: {exc}") from exc
        _log_generation(tlog, rep, selector, config, tid)
        with open(state_path, "wb") as fh:
            pickle.dump({"generation": g + 1, "selector": selector, "learner": learner.state_dict(),
                         "log": tlog, "config_hash": chash, "seed": seed}, fh)
        if stop_after is not None and g + 1 >= stop_after and g + 1 < config.generations:
            return None

    return _finish(config, seed, out, tid, chash, selector, learner, tlog)


def _log_generation(tlog: TrialLog, rep: GenerationReport, selector: Selector,
                    config: ExperimentConfig, tid: str) -> None:
    g = rep.generation
    for r, value in enumerate(rep.rollout_mean_rewards):
        tlog.rollouts.append((g, r, value))
        tlog.metrics.append((tid, g * config.rollouts + r, "mean_reward", value,
                             config.scenario_name, config.selector))
    pop = selector.population()
    for c, f, m in zip(pop.commands, pop.fitness, pop.mean_positive_reward):
        tlog.population.append((g, *c.tolist(), *f.tolist(), float(m)))
    tlog.metrics.append((tid, g, "quadrant_density", quadrant_density(pop.commands),
                         config.scenario_name, config.selector))
    tlog.simulations += rep.simulations
    tlog.updates += rep.updates


def _finish(config, seed, out, tid, chash, selector, learner, tlog) -> TrialResult:
    policy = learner.policy
    grid = evaluation_grid(config.bounds, config.grid_points)
    pop = selector.population()
    kw = dict(steps=config.steps, bounds=config.bounds, settle_fraction=config.settle_fraction)
    grid_dist, grid_records = evaluate_controller(policy, grid, config.scenario_spec, **kw)
    pop_dist, pop_records = evaluate_controller(policy, population_set(pop.commands), config.scenario_spec, **kw)
    density = quadrant_density(pop.commands)
    k = config.generations
    for name, value in (("test_grid_mean_distance", grid_dist), ("population_mean_distance", pop_dist),
                        ("final_quadrant_density", density)):
        tlog.metrics.append((tid, k, name, value, config.scenario_name, config.selector))

    io.write_rollouts(out / io.ROLLOUTS, tlog.rollouts)
    io.write_population(out / io.POPULATION, tlog.population, selector.n_objectives)
    io.write_metrics(out / io.METRICS, tlog.metrics)
    io.write_eval(out / io.EVAL_GRID, grid_records)
    io.write_eval(out / io.EVAL_POPULATION, pop_records)
    io.save_checkpoint(out / io.CHECKPOINT, learner, chash)

    faulted = sum(r.faulted for r in grid_records + pop_records)
    if faulted:
        log.warning("%s: %d evaluation simulations faulted", tid, faulted)
    result = TrialResult(
        trial_id=tid, config_hash=chash, seed=seed, scenario=config.scenario_name,
        selector=config.selector, generations=k, simulations=tlog.simulations, updates=tlog.updates,
        rollout_mean_rewards=[row[2] for row in tlog.rollouts],
        test_grid_mean_distance=grid_dist, test_grid_excluded=grid.excluded,
        population_mean_distance=pop_dist, quadrant_density=density, faulted_commands=faulted,
        population_dump=io.POPULATION, checkpoint=io.CHECKPOINT,
    )
    io.write_json(out / io.SUMMARY, result.to_dict())
    io.write_manifest(out, chash)
    return result
