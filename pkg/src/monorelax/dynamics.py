"""Proximal implicit-Euler solution of ``-x' in A(x) + h(t)`` and its controlled variants.

The monotone part is treated implicitly through the resolvent and the
forcing explicitly::

    x_{k+1} = J_{dt_k}(x_k - dt_k * h_k)

so every step is closed form and, for normal-cone operators, every state
lies in the constraint box exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .controls import ControlSignal
from .errors import ControlBoundError, HypothesisError, NonFiniteForcingError
from .grid import Grid, StepProfile, integrate_product
from .monotone import (MonotoneOperator, distance_to_image, domain_distance,
                       domain_project, resolvent)

__all__ = [
    "FieldSpec",
    "Trajectory",
    "solve_forced",
    "solve_controlled",
    "solve_young",
    "apriori_bound",
    "continuity_probe",
    "write_trajectory_csv",
    "read_trajectory_csv",
]

DOMAIN_TOL = 1e-9
CONTROL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """Control matrix field ``f(t, x)`` in ``L(R^m, R^N)``.

    kind
        ``"constant"``: ``f = B``;
        ``"state_affine"``: ``f = (1 + gain * min(|x|, radius)) * B``;
        ``"time_weighted"``: ``f = weight(t) * B``.
    bound
        Declared growth profile ``a(t)`` with ``||f(t,x)|| <= a(t)(1 + |x|)``.
    lipschitz
        Declared local Lipschitz profile ``l_r(t)``.
    """

    kind: str
    B: np.ndarray
    bound: StepProfile
    lipschitz: StepProfile
    gain: float = 0.0
    radius: float = 1.0
    weight: StepProfile | None = None

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "B", B)
        if self.kind not in ("constant", "state_affine", "time_weighted"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "time_weighted" and self.weight is None:
            raise ValueError("time_weighted field needs a weight profile")

    @property
    def N(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def scale(self, t, x) -> np.ndarray:
        """Scalar multiplier of ``B``; shape ``x.shape[:-1]``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.ones(x.shape[:-1])
        if self.kind == "time_weighted":
            return np.full(x.shape[:-1], self.weight(t))
        r = np.minimum(np.linalg.norm(x, axis=-1), self.radius)
        return 1.0 + self.gain * r

    def __call__(self, t, x) -> np.ndarray:
        s = self.scale(t, x)
        return s[..., None, None] * self.B

    def apply(self, t, x, u) -> np.ndarray:
        """``f(t, x) u`` for batched ``x`` (..., N) and ``u`` (..., m)."""
        s = self.scale(t, x)
        return s[..., None] * (np.asarray(u, dtype=float) @ self.B.T)


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: Grid
    states: np.ndarray
    residuals: np.ndarray

    @property
    def residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0

    @property
    def N(self) -> int:
        return self.states.shape[1]

    def sup_norm(self) -> float:
        return float(np.linalg.norm(self.states, axis=1).max())

    def at(self, t) -> np.ndarray:
        """Piecewise-linear interpolation of the states at times ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([np.interp(t, self.grid.times, self.states[:, j])
                         for j in range(self.N)], axis=-1)


def _forcing_values(h, grid: Grid, N: int) -> np.ndarray:
    if isinstance(h, ControlSignal):
        if h.grid != grid:
            h = h.resample(grid)
        vals = np.asarray(h.values, dtype=float)
    elif callable(h):
        vals = np.array([np.broadcast_to(np.asarray(h(t), float), (N,))
                         for t in grid.times[:-1]])
    else:
        vals = np.asarray(h, dtype=float)
        if vals.ndim == 1 and N == 1 and len(vals) == grid.K:
            vals = vals[:, None]
        vals = np.broadcast_to(vals, (grid.K, N))
    vals = np.asarray(vals, dtype=float).reshape(grid.K, N)
    bad = ~np.all(np.isfinite(vals), axis=1)
    if np.any(bad):
        raise NonFiniteForcingError(int(np.argmax(bad)))
    return vals


def _march(op: MonotoneOperator, x0, grid: Grid, forcing_at) -> Trajectory:
    x = domain_project(op, np.atleast_1d(np.asarray(x0, dtype=float)))
    states = np.empty((grid.K + 1, len(x)))
    residuals = np.zeros(grid.K + 1)
    states[0] = x
    for k, dt in enumerate(grid.steps):
        h = forcing_at(k, x)
        nxt = resolvent(op, dt, x - dt * h)
        residuals[k + 1] = distance_to_image(op, nxt, (x - nxt) / dt - h)
        states[k + 1] = nxt
        x = nxt
    return Trajectory(grid, states, residuals)


def _check_initial(op, x0):
    d = domain_distance(op, np.atleast_1d(np.asarray(x0, dtype=float)))
    if d > DOMAIN_TOL:
        raise HypothesisError(f"x0 lies {d:.3g} away from cl D(A)", {"distance": d})


def solve_forced(op: MonotoneOperator, h, x0, grid: Grid) -> Trajectory:
    """Solve ``-x' in A(x) + h(t)``, ``x(0) = x0`` on ``grid``.

    Parameters
    ----------
    op : MonotoneOperator
    h : ControlSignal, callable ``t -> R^N`` or array of shape (K, N)
        Forcing, constant on each grid interval (callables are sampled at
        left endpoints).
    x0 : array_like
        Initial state within ``1e-9`` of the closed domain; it is projected.
    grid : Grid

    Returns
    -------
    Trajectory
    """
    _check_initial(op, x0)
    vals = _forcing_values(h, grid, op.dim)
    return _march(op, x0, grid, lambda k, x: vals[k])


def solve_controlled(problem, u: ControlSignal) -> Trajectory:
    """Simulate ``-x' in A(x) + f(t, x) u(t)`` with ``f u`` treated explicitly."""
    M = problem.controls.M
    norms = np.linalg.norm(u.values, axis=1)
    over = norms > M + CONTROL_TOL
    if np.any(over):
        k = int(np.argmax(over))
        raise ControlBoundError(k, float(norms[k]), M)
    _check_initial(problem.operator, problem.x0)
    times = u.grid.times
    field = problem.field
    vals = u.values
    return _march(problem.operator, problem.x0, u.grid,
                  lambda k, x: field.apply(times[k], x, vals[k]))


def solve_young(problem, lam) -> Trajectory:
    """Relaxed dynamics driven by a Young control.

    ``f(t, x)`` is linear in ``u``, so integrating ``f(t, x) u`` against the
    measure gives ``f(t, x)`` applied to its barycenter; this is literally
    :func:`solve_controlled` on the barycenter signal.
    """
    return solve_controlled(problem, lam.barycenter_signal())


def apriori_bound(problem) -> float:
    """Gronwall constant ``(|x0| + A1) exp(A1)``, ``A1 = int a(s) max(1, a0(s)) ds``."""
    a = problem.field.bound
    a0 = problem.controls.a0
    A1 = integrate_product(a, a0, transform=lambda v: np.maximum(1.0, v))
    x0 = float(np.linalg.norm(problem.x0))
    return (x0 + A1) * math.exp(A1)


def continuity_probe(op: MonotoneOperator, x0, forcings, reference, grid: Grid) -> list[float]:
    """Sup-norm distances ``||K(h_n) - K(reference)||`` of the forced solutions."""
    ref = solve_forced(op, reference, x0, grid).states
    out = []
    for h in forcings:
        xs = solve_forced(op, h, x0, grid).states
        out.append(float(np.linalg.norm(xs - ref, axis=1).max()))
    return out


def write_trajectory_csv(traj: Trajectory, path) -> None:
    N = traj.N
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x_{j + 1}" for j in range(N)] + ["residual"])
        for t, x, r in zip(traj.grid.times, traj.states, traj.residuals):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x] + [repr(float(r))])


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "t" or header[-1] != "residual":
        raise ValueError(f"{path}: not a trajectory CSV")
    data = np.array([[float(v) for v in r] for r in body])
    return Trajectory(Grid.from_times(data[:, 0]), data[:, 1:-1], data[:, -1])
