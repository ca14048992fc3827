"""Time grids and nonnegative step profiles on a horizon ``[0, b]``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "StepProfile", "merge_times", "integrate_product"]

# Breakpoints closer than this (relative to the horizon) are treated as equal.
_MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Partition ``0 = t_0 < t_1 < ... < t_K = b`` of the horizon.

    ``Grid(b, K)`` is the uniform grid with ``t_k = k b / K``.  Non-uniform
    grids only arise as refinements (chattering, simulation meshes) and are
    built with :meth:`from_times`.
    """

    b: float
    K: int
    times: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not (self.b > 0 and np.isfinite(self.b)):
            raise ValueError(f"horizon must be positive and finite, got {self.b}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        object.__setattr__(self, "K", int(self.K))
        if self.times is None:
            t = np.arange(self.K + 1, dtype=float) * (self.b / self.K)
            t[-1] = self.b
        else:
            t = np.asarray(self.times, dtype=float)
            if t.shape != (self.K + 1,):
                raise ValueError("times must have K+1 entries")
            if t[0] != 0.0 or abs(t[-1] - self.b) > _MERGE_RTOL * self.b:
                raise ValueError("times must run from 0 to b")
            if np.any(np.diff(t) <= 0):
                raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def from_times(cls, times) -> "Grid":
        t = np.asarray(times, dtype=float)
        return cls(float(t[-1]), len(t) - 1, t)

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def dt(self) -> float:
        """Uniform spacing ``b / K`` (only meaningful for uniform grids)."""
        return self.b / self.K

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.steps, self.dt, rtol=1e-12, atol=0.0))

    def interval_index(self, t) -> np.ndarray:
        """Index ``k`` with ``t_k <= t < t_{k+1}`` (last interval closed)."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        return np.clip(idx, 0, self.K - 1)

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.K == other.K and self.b == other.b
                and np.array_equal(self.times, other.times))

    def __hash__(self):
        return hash((self.b, self.K, self.times.tobytes()))


def merge_times(*grids_or_arrays, b: float | None = None) -> Grid:
    """Common refinement of several partitions of the same horizon.

    Points closer than ``1e-12 * b`` collapse to the first one, so floating
    round-off in independently computed breakpoints does not create
    sliver intervals.
    """
    arrays = [g.times if isinstance(g, Grid) else np.asarray(g, float)
              for g in grids_or_arrays]
    t = np.unique(np.concatenate(arrays))
    if b is None:
        b = float(t[-1])
    tol = _MERGE_RTOL * b
    keep = [0.0]
    for s in t[1:]:
        if s - keep[-1] > tol:
            keep.append(float(s))
    keep[-1] = b
    return Grid.from_times(keep)


@dataclass(frozen=True)
class StepProfile:
    """Right-continuous step function ``t -> values[j]`` on ``[breaks[j], breaks[j+1])``.

    Used for every declared hypothesis profile (growth bounds, Lipschitz
    constants).  Values must be nonnegative.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        br = np.asarray(self.breaks, dtype=float)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if br.ndim != 1 or len(br) != len(vals) + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if br[0] != 0.0 or np.any(np.diff(br) <= 0):
            raise ValueError("breaks must start at 0 and increase strictly")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("profile values must be finite and nonnegative")
        object.__setattr__(self, "breaks", br)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float, b: float) -> "StepProfile":
        return cls(np.array([0.0, float(b)]), np.array([float(value)]))

    @property
    def horizon(self) -> float:
        return float(self.breaks[-1])

    def __call__(self, t):
        idx = np.searchsorted(self.breaks, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out

    def sup(self) -> float:
        return float(self.values.max())

    def integral(self) -> float:
        return float(np.dot(self.values, np.diff(self.breaks)))


def integrate_product(f: StepProfile, g: StepProfile, transform=None) -> float:
    """Exact integral of ``f(t) * transform(g(t))`` over the common horizon."""
    b = min(f.horizon, g.horizon)
    pts = np.unique(np.concatenate([f.breaks, g.breaks]))
    pts = pts[pts <= b]
    if pts[-1] < b:
        pts = np.append(pts, b)
    mids = 0.5 * (pts[:-1] + pts[1:])
    gv = g(mids)
    if transform is not None:
        gv = transform(gv)
    return float(np.sum(f(mids) * gv * np.diff(pts)))
