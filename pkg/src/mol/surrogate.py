"""Deterministic quadruped stand-in.

Eight abstract actuators drive body velocities through a fixed mixing map
with tanh saturation and a first-order lag. Scenario presets constrain the
actuators the same way the physical scenarios constrain joints: masking
hips, disabling the hind legs, or zeroing small actions.

Actuator layout::

    0 front-left thrust    1 front-right thrust
    2 hind-left thrust     3 hind-right thrust
    4 left hip (lateral)   5 right hip (lateral)
    6 hind-left stance     7 hind-right stance

Everything is vectorized over a leading batch axis so a whole rollout of
commands steps together.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .commands import as_commands
from .reward import RewardConfig, SimulationFault, StepOutcome, negative_reward, positive_reward

N_ACTUATORS = 8
HIP_ACTUATORS = (4, 5)
REAR_ACTUATORS = (2, 3, 6, 7)
OBS_DIM = 3 + 2 + N_ACTUATORS + 3

VMAX = 1.25
LAG = 0.2
YAW_COUPLING = 0.25
POSTURE_RATE = 0.1
NOMINAL_EFFORT = 0.4
NOMINAL_JOINT_RATE = 1.0
MIXING_SEED = 20240521


def _build_mixing(seed: int = MIXING_SEED) -> np.ndarray:
    # rows: vx, vy, wz. Lateral motion only through the antagonistic hip pair.
    base = np.array([
        [0.50, 0.50, 0.50, 0.50, 0.0, 0.0, 0.35, 0.35],
        [0.0, 0.0, 0.0, 0.0, 0.90, -0.90, 0.0, 0.0],
        [-0.50, 0.50, -0.50, 0.50, 0.0, 0.0, -0.40, 0.40],
    ])
    jitter = np.random.default_rng(seed).uniform(0.97, 1.03, size=base.shape)
    mixing = base * jitter
    mixing.setflags(write=False)
    return mixing


MIXING = _build_mixing()


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    mask: tuple[float, ...] = (1.0,) * N_ACTUATORS
    disable_lateral: bool = False
    deadzone: float = 0.0

    def __post_init__(self):
        if len(self.mask) != N_ACTUATORS:
            raise ValueError(f"actuator mask needs {N_ACTUATORS} entries")
        if not 0.0 <= self.deadzone < 1.0:
            raise ValueError("deadzone must be in [0, 1)")
        mask = [float(m) for m in self.mask]
        if self.disable_lateral:
            for i in HIP_ACTUATORS:
                mask[i] = 0.0
        object.__setattr__(self, "mask", tuple(mask))

    @property
    def mask_array(self) -> np.ndarray:
        return np.asarray(self.mask)

    def to_dict(self) -> dict:
        return {"name": self.name, "mask": list(self.mask),
                "disable_lateral": self.disable_lateral, "deadzone": self.deadzone}

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(name=d["name"], mask=tuple(d.get("mask", (1.0,) * N_ACTUATORS)),
                   disable_lateral=bool(d.get("disable_lateral", False)),
                   deadzone=float(d.get("deadzone", 0.0)))


def _rear_mask():
    m = [1.0] * N_ACTUATORS
    for i in REAR_ACTUATORS:
        m[i] = 0.0
    return tuple(m)


SCENARIOS: dict[str, ScenarioSpec] = {
    "nominal": ScenarioSpec("nominal"),
    "limited": ScenarioSpec("limited", disable_lateral=True),
    "back": ScenarioSpec("back", mask=_rear_mask()),
    "run": ScenarioSpec("run", deadzone=0.6),
}


def get_scenario(spec) -> ScenarioSpec:
    if isinstance(spec, ScenarioSpec):
        return spec
    if isinstance(spec, dict):
        return SCENARIOS[spec["name"]] if set(spec) == {"name"} else ScenarioSpec.from_dict(spec)
    try:
        return SCENARIOS[spec]
    except KeyError:
        raise ValueError(f"unknown scenario {spec!r}; presets: {sorted(SCENARIOS)}") from None


@dataclass
class SurrogateState:
    velocity: np.ndarray
    posture: np.ndarray
    height: np.ndarray
    prev_action: np.ndarray
    step: int = 0

    def copy(self) -> "SurrogateState":
        return SurrogateState(self.velocity.copy(), self.posture.copy(), self.height.copy(),
                              self.prev_action.copy(), self.step)


def observe(state: SurrogateState, commands: np.ndarray) -> np.ndarray:
    return np.concatenate(
        [state.velocity, state.posture[:, None], state.height[:, None], state.prev_action, commands],
        axis=1,
    )


def reset(scenario, commands, seed=None) -> tuple[SurrogateState, np.ndarray]:
    """Start a batch of episodes at rest.

    The dynamics are deterministic, so ``seed`` does not influence the
    initial state; it is accepted to keep the episode protocol uniform.
    """
    get_scenario(scenario)
    commands = as_commands(commands)
    b = commands.shape[0]
    state = SurrogateState(
        velocity=np.zeros((b, 3)),
        posture=np.zeros(b),
        height=np.zeros(b),
        prev_action=np.zeros((b, N_ACTUATORS)),
    )
    return state, observe(state, commands)


def effective_action(action, scenario: ScenarioSpec) -> np.ndarray:
    a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    if scenario.deadzone > 0:
        a = np.where(np.abs(a) < scenario.deadzone, 0.0, a)
    return a * scenario.mask_array


def target_velocity(a: np.ndarray) -> np.ndarray:
    pre = a @ MIXING.T
    pre[..., 2] += YAW_COUPLING * pre[..., 0] * pre[..., 1]
    return VMAX * np.tanh(pre)


def actuator_asymmetry(a: np.ndarray) -> np.ndarray:
    pitch = np.abs(a[..., 0:2].mean(axis=-1) - a[..., 2:4].mean(axis=-1))
    roll = np.abs(a[..., 4] + a[..., 5]) / 2.0
    return pitch + roll


def step(state: SurrogateState, action, scenario) -> tuple[SurrogateState, StepOutcome]:
    scenario = get_scenario(scenario)
    action = np.asarray(action, dtype=float)
    if not np.all(np.isfinite(action)):
        raise SimulationFault("non-finite action")
    a = effective_action(action, scenario)
    velocity = state.velocity + LAG * (target_velocity(a) - state.velocity)
    posture = state.posture + POSTURE_RATE * (actuator_asymmetry(a) - state.posture)
    height = np.abs(np.abs(a).mean(axis=-1) - NOMINAL_EFFORT)
    joint = np.maximum(np.linalg.norm(a - state.prev_action, axis=-1) - NOMINAL_JOINT_RATE, 0.0)
    nxt = SurrogateState(velocity, posture, height, a, state.step + 1)
    return nxt, StepOutcome(velocity=velocity, posture=posture, height=height, joint_speed=joint)


@dataclass
class Trajectory:
    """Per-step record of a batch of simulations, arrays shaped ``(B, T, ...)``."""
    commands: np.ndarray
    observations: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rl_rewards: np.ndarray
    positive_rewards: np.ndarray
    velocities: np.ndarray
    faulted: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.faulted is None:
            self.faulted = np.zeros(self.commands.shape[0], dtype=bool)

    def __len__(self) -> int:
        return self.observations.shape[1]

    @property
    def batch_size(self) -> int:
        return self.commands.shape[0]

    @property
    def mean_positive_reward(self) -> np.ndarray:
        return self.positive_rewards.mean(axis=1)

    def mean_velocity(self, settle_fraction: float = 0.1) -> np.ndarray:
        start = int(np.floor(settle_fraction * len(self)))
        start = min(start, len(self) - 1)
        return self.velocities[:, start:].mean(axis=1)

    def select(self, idx) -> "Trajectory":
        return Trajectory(self.commands[idx], self.observations[idx], self.actions[idx],
                          self.log_probs[idx], self.rl_rewards[idx], self.positive_rewards[idx],
                          self.velocities[idx], self.faulted[idx])

    @staticmethod
    def concatenate(parts: list["Trajectory"]) -> "Trajectory":
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts], axis=0)
        return Trajectory(cat("commands"), cat("observations"), cat("actions"), cat("log_probs"),
                          cat("rl_rewards"), cat("positive_rewards"), cat("velocities"),
                          cat("faulted"))


def simulate(policy, commands, scenario, steps: int, noise: np.ndarray | None = None,
             reward_cfg: RewardConfig = RewardConfig()) -> Trajectory:
    """Roll ``policy`` on a batch of commands for ``steps`` steps.

    ``policy`` is either an object with ``mean_action(obs)`` and ``std`` (and
    optionally ``log_prob(raw, mean)``) or a plain function ``obs -> action``.
    ``noise`` is a standard-normal array ``(B, steps, 8)``; ``None`` runs
    deterministically. A simulation whose policy emits non-finite actions is
    marked faulted and continues with zero action so the batch stays aligned.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    scenario = get_scenario(scenario)
    commands = as_commands(commands)
    b = commands.shape[0]
    mean_fn = getattr(policy, "mean_action", policy)
    std = getattr(policy, "std", 0.0)
    log_prob = getattr(policy, "log_prob", None)
    state, obs = reset(scenario, commands)

    obs_log = np.empty((b, steps, OBS_DIM))
    act_log = np.empty((b, steps, N_ACTUATORS))
    logp_log = np.zeros((b, steps))
    rl_log = np.empty((b, steps))
    pos_log = np.empty((b, steps))
    vel_log = np.empty((b, steps, 3))
    faulted = np.zeros(b, dtype=bool)

    for t in range(steps):
        obs_log[:, t] = obs
        mean = np.asarray(mean_fn(obs), dtype=float)
        raw = mean if noise is None else mean + std * noise[:, t]
        bad = ~np.all(np.isfinite(raw), axis=1)
        if np.any(bad):
            faulted |= bad
            raw = np.where(bad[:, None], 0.0, raw)
        act_log[:, t] = raw
        if log_prob is not None and noise is not None:
            logp_log[:, t] = log_prob(raw, np.where(bad[:, None], 0.0, mean))
        state, outcome = step(state, np.clip(raw, -1.0, 1.0), scenario)
        pos = positive_reward(commands, outcome.velocity, reward_cfg)
        pos_log[:, t] = pos
        rl_log[:, t] = pos + negative_reward(outcome, reward_cfg)
        vel_log[:, t] = outcome.velocity
        obs = observe(state, commands)

    return Trajectory(commands, obs_log, act_log, logp_log, rl_log, pos_log, vel_log, faulted)


def simulate_command(policy, command, scenario, steps: int, seed=None,
                     reward_cfg: RewardConfig = RewardConfig(), explore: bool = True) -> Trajectory:
    """Single-command episode; exploration noise is drawn from ``seed``."""
    noise = None
    if explore and getattr(policy, "std", 0.0) > 0:
        noise = np.random.default_rng(seed).standard_normal((1, steps, N_ACTUATORS))
    return simulate(policy, as_commands(command), scenario, steps, noise, reward_cfg)


def linear_regime_action(command) -> np.ndarray:
    """Minimum-norm action whose steady-state velocity equals ``command`` (nominal scenario).

    Inverts the saturation and yaw coupling exactly, then solves the linear
    mixing with the pseudo-inverse. Only valid where the result stays inside
    ``[-1, 1]``.
    """
    c = as_commands(command)
    pre = np.arctanh(c / VMAX)
    pre[:, 2] -= YAW_COUPLING * pre[:, 0] * pre[:, 1]
    return pre @ np.linalg.pinv(MIXING).T
