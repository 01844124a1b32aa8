"""Command domain and the objective space commands are projected into.

A command is a velocity triple ``(vx, vy, wz)``. Commands are normalized
per axis into ``[-1, 1]``, L2-projected onto the unit sphere, and compared by
angle against the vertices of a regular simplex inscribed in that sphere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPSILON_MIN = 0.05
UNIT_TOL = 1e-9
AXES = ("vx", "vy", "wz")


class CommandError(ValueError):
    """Out-of-domain command or geometry input."""


class DegenerateCommandError(CommandError):
    """Normalized command too close to the origin to have a direction."""


@dataclass(frozen=True)
class CommandBounds:
    low: tuple[float, ...] = (-1.0, -1.0, -1.0)
    high: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        lo = np.asarray(self.low, dtype=float)
        hi = np.asarray(self.high, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise CommandError("bounds low/high must be equal-length vectors")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise CommandError("bounds must be finite")
        bad = np.nonzero(lo >= hi)[0]
        if bad.size:
            raise CommandError(f"bounds min >= max on dimension {_axis(bad[0])}")
        object.__setattr__(self, "low", tuple(float(x) for x in lo))
        object.__setattr__(self, "high", tuple(float(x) for x in hi))

    @property
    def dims(self) -> int:
        return len(self.low)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.low)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.high)

    @property
    def half_range(self) -> np.ndarray:
        return (self.hi - self.lo) / 2.0

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    @property
    def max_axis_magnitude(self) -> float:
        """Largest absolute bound over all axes."""
        return float(np.max(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    @property
    def max_magnitude(self) -> float:
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def contains(self, c) -> bool:
        c = np.asarray(c, dtype=float)
        return bool(np.all(c >= self.lo) and np.all(c <= self.hi))

    def clip(self, c) -> np.ndarray:
        return np.clip(np.asarray(c, dtype=float), self.lo, self.hi)

    @classmethod
    def from_dict(cls, d: dict) -> "CommandBounds":
        return cls(low=tuple(d["low"]), high=tuple(d["high"]))

    def to_dict(self) -> dict:
        return {"low": list(self.low), "high": list(self.high)}


def _axis(i: int) -> str:
    return AXES[i] if i < len(AXES) else f"dim{i}"


def normalize_command(c, bounds: CommandBounds) -> np.ndarray:
    """Affine per-axis map of ``c`` from ``bounds`` onto ``[-1, 1]``.

    Accepts a single command ``(d,)`` or a batch ``(n, d)``.
    """
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != bounds.dims:
        raise CommandError(f"command has {c.shape[-1]} components, bounds have {bounds.dims}")
    lo, hi = bounds.lo, bounds.hi
    outside = (c < lo) | (c > hi) | ~np.isfinite(c)
    if np.any(outside):
        dim = int(np.nonzero(outside.reshape(-1, bounds.dims).any(axis=0))[0][0])
        raise CommandError(
            f"command component {_axis(dim)} outside bounds [{lo[dim]}, {hi[dim]}]"
        )
    return 2.0 * (c - lo) / (hi - lo) - 1.0


def normalized_magnitude(c, bounds: CommandBounds) -> np.ndarray:
    return np.linalg.norm(normalize_command(c, bounds), axis=-1)


def is_degenerate(c, bounds: CommandBounds, eps: float = EPSILON_MIN):
    return normalized_magnitude(c, bounds) < eps


def project_to_sphere(n, eps: float = EPSILON_MIN) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(norm < eps):
        raise DegenerateCommandError(
            f"normalized command magnitude below {eps}; no direction in objective space"
        )
    return n / norm


def simplex_points(d: int) -> np.ndarray:
    """Vertices of the regular simplex inscribed in the unit sphere of R^d.

    Returns a ``(d + 1, d)`` array. The first vertex is the first coordinate
    axis; the rest are the ``d - 1`` simplex scaled into the orthogonal
    complement and shifted to ``-1/d`` along that axis.
    """
    if int(d) != d or d < 1:
        raise CommandError(f"simplex dimension must be an integer >= 1, got {d}")
    d = int(d)
    if d == 1:
        return np.array([[1.0], [-1.0]])
    sub = simplex_points(d - 1)
    out = np.zeros((d + 1, d))
    out[0, 0] = 1.0
    out[1:, 0] = -1.0 / d
    out[1:, 1:] = np.sqrt(1.0 - 1.0 / d**2) * sub
    return out


def angle_between(u, v) -> np.ndarray:
    """Angle in ``[0, pi]`` between unit vectors (broadcasts over leading axes)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for name, x in (("u", u), ("v", v)):
        if np.any(np.abs(np.linalg.norm(x, axis=-1) - 1.0) > UNIT_TOL):
            raise CommandError(f"{name} is not unit-norm")
    dot = np.clip(np.sum(u * v, axis=-1), -1.0, 1.0)
    return np.arccos(dot)


@dataclass(frozen=True)
class ObjectiveSpace:
    dims: int = 3
    vertices: np.ndarray = field(init=False, repr=False, compare=False)
    max_angle: float = field(init=False)

    def __post_init__(self):
        verts = simplex_points(self.dims)
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "max_angle", float(angle_between(verts[0], verts[1])))

    @property
    def n_objectives(self) -> int:
        return self.dims + 1


def as_commands(cs: Sequence) -> np.ndarray:
    """Stack commands into an ``(n, d)`` float array."""
    arr = np.asarray(cs, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def sample_uniform(bounds: CommandBounds, n: int, rng: np.random.Generator,
                   lo=None, hi=None, eps: float = EPSILON_MIN) -> np.ndarray:
    """Uniform commands in ``[lo, hi]`` (defaults to the full bounds), rejecting degenerate draws."""
    lo = bounds.lo if lo is None else np.asarray(lo, dtype=float)
    hi = bounds.hi if hi is None else np.asarray(hi, dtype=float)
    out = np.empty((n, bounds.dims))
    for i in range(n):
        while True:
            c = rng.uniform(lo, hi)
            if not is_degenerate(c, bounds, eps):
                out[i] = c
                break
    return out
