"""Shared domain types and numerical primitives.

Every curve in this package lives on a common uniform grid over normalized
time [0, 1]. The types below are immutable after construction (their arrays
are frozen), so they can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DimensionError",
    "DomainError",
    "ParameterError",
    "InsufficientDataError",
    "DegenerateInputError",
    "TimeGrid",
    "TrajectoryMeta",
    "Trajectory",
    "SrvfCurve",
    "Warping",
    "DistanceTriple",
    "inner_product",
    "l2_norm",
    "interp_linear",
]

_UNIFORM_TOL = 1e-12


class DimensionError(ValueError):
    """Inputs whose lengths/grids do not match."""


class DomainError(ValueError):
    """Query points outside the normalized time domain [0, 1]."""


class ParameterError(ValueError):
    """Parameter outside its documented range."""


class InsufficientDataError(ValueError):
    """Too few samples to perform the operation."""


class DegenerateInputError(ValueError):
    """Input that makes the operation undefined (e.g. an all-zero signal)."""


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of `n` points spanning [0, 1] inclusive."""

    n: int
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise ParameterError(f"grid needs at least 3 points, got {self.n}")
        pts = np.linspace(0.0, 1.0, self.n)
        assert abs(np.diff(pts).max() - np.diff(pts).min()) < _UNIFORM_TOL
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def spacing(self) -> float:
        return 1.0 / (self.n - 1)


@dataclass(frozen=True)
class TrajectoryMeta:
    participant: str | None = None
    cohort: str | None = None
    trial: str | None = None


@dataclass(frozen=True)
class Trajectory:
    """Scalar signal sampled on a TimeGrid (e.g. angular velocity)."""

    grid: TimeGrid
    values: np.ndarray
    meta: TrajectoryMeta | None = None

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or v.size != self.grid.n:
            raise DimensionError(
                f"expected {self.grid.n} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise DegenerateInputError("trajectory contains non-finite values")
        object.__setattr__(self, "values", v)

    def with_meta(self, meta: TrajectoryMeta) -> "Trajectory":
        return Trajectory(self.grid, self.values, meta)


@dataclass(frozen=True)
class SrvfCurve:
    """Square-root velocity representation of a trajectory."""

    grid: TimeGrid
    q: np.ndarray

    def __post_init__(self):
        q = _frozen(self.q)
        if q.ndim != 1 or q.size != self.grid.n:
            raise DimensionError(f"expected {self.grid.n} values, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise DegenerateInputError("SRVF contains non-finite values")
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class Warping:
    """Boundary-preserving monotone reparametrization of [0, 1].

    gamma[0] and gamma[-1] are pinned to exactly 0 and 1 at construction;
    interior values are clipped into [0, 1] and forced non-decreasing to
    absorb interpolation round-off.
    """

    grid: TimeGrid
    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 1 or g.size != self.grid.n:
            raise DimensionError(f"expected {self.grid.n} values, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DegenerateInputError("warping contains non-finite values")
        if np.any(np.diff(g) < -1e-9):
            raise DegenerateInputError("warping is decreasing")
        g = np.maximum.accumulate(np.clip(g, 0.0, 1.0))
        g[0], g[-1] = 0.0, 1.0
        object.__setattr__(self, "gamma", _frozen(g))

    @classmethod
    def identity(cls, grid: TimeGrid) -> "Warping":
        return cls(grid, grid.points)

    def inverse(self) -> "Warping":
        # gamma is monotone onto [0,1]; invert by swapping axes of the graph.
        inv = np.interp(self.grid.points, self.gamma, self.grid.points)
        return Warping(self.grid, inv)

    def compose(self, inner: "Warping") -> "Warping":
        """Return self o inner, i.e. t -> self.gamma(inner.gamma(t))."""
        if inner.grid.n != self.grid.n:
            raise DimensionError("warpings live on different grids")
        g = np.interp(inner.gamma, self.grid.points, self.gamma)
        return Warping(self.grid, g)


@dataclass(frozen=True)
class DistanceTriple:
    """Amplitude / phase / cosine distances of one curve to a reference."""

    amplitude: float
    phase: float
    cosine: float

    def __post_init__(self):
        for name, val in (("amplitude", self.amplitude),
                          ("phase", self.phase),
                          ("cosine", self.cosine)):
            if not np.isfinite(val):
                raise DegenerateInputError(f"{name} distance is not finite")
        if self.amplitude < 0:
            raise DegenerateInputError("amplitude distance is negative")
        if not (-1e-9 <= self.phase <= np.pi / 2 + 1e-9):
            raise DegenerateInputError(f"phase distance {self.phase} outside [0, pi/2]")
        if not (-1e-9 <= self.cosine <= 2 + 1e-9):
            raise DegenerateInputError(f"cosine distance {self.cosine} outside [0, 2]")


def inner_product(f: np.ndarray, g: np.ndarray, grid: TimeGrid) -> float:
    """L2 inner product <f, g> on [0, 1] by the trapezoid rule."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (grid.n,) or g.shape != (grid.n,):
        raise DimensionError(
            f"inner_product needs two length-{grid.n} arrays, "
            f"got {f.shape} and {g.shape}"
        )
    return float(np.trapezoid(f * g, dx=grid.spacing))


def l2_norm(f: np.ndarray, grid: TimeGrid) -> float:
    return float(np.sqrt(max(inner_product(f, f, grid), 0.0)))


def interp_linear(traj: Trajectory, at: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of a trajectory; exact at grid nodes."""
    at = np.asarray(at, dtype=float)
    if at.size and (at.min() < -1e-12 or at.max() > 1.0 + 1e-12):
        raise DomainError(
            f"query points outside [0, 1]: range [{at.min()}, {at.max()}]"
        )
    return np.interp(np.clip(at, 0.0, 1.0), traj.grid.points, traj.values)
