"""Young-measure relaxation with finitely supported measures per interval."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .controls import ControlSignal, set_distance
from .errors import SupportViolation
from .grid import Grid

__all__ = [
    "DiscreteMeasure",
    "YoungControl",
    "barycenter",
    "cost_Jhat",
    "dirac_embed",
    "narrow_functional",
    "test_family",
    "SupportReport",
    "young_support_check",
    "write_young_csv",
    "read_young_csv",
]

WEIGHT_TOL = 1e-12
SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure ``sum_i weights[i] * delta(atoms[i])``."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(w) != len(atoms):
            raise ValueError("one weight per atom required")
        if np.any(w < -WEIGHT_TOL) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must be a probability vector (sum={w.sum()!r})")
        if len(atoms) > 1:
            d = np.linalg.norm(atoms[:, None, :] - atoms[None, :, :], axis=-1)
            d[np.diag_indices(len(atoms))] = np.inf
            if d.min() <= WEIGHT_TOL:
                raise ValueError("atoms must be pairwise distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", np.maximum(w, 0.0))

    @classmethod
    def dirac(cls, u) -> "DiscreteMeasure":
        return cls(np.atleast_1d(np.asarray(u, dtype=float))[None, :], np.ones(1))

    @classmethod
    def from_weights(cls, atoms, weights, drop_below: float = 0.0) -> "DiscreteMeasure":
        """Build from possibly unnormalized weights, merging duplicate atoms."""
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        w = np.maximum(np.asarray(weights, dtype=float), 0.0)
        keep = w > drop_below
        atoms, w = atoms[keep], w[keep]
        uniq, inv = np.unique(atoms, axis=0, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inv.reshape(-1), w)
        return cls(uniq, merged / merged.sum())

    def integrate(self, fn) -> float:
        return float(np.dot(self.weights, fn(self.atoms)))


def barycenter(mu: DiscreteMeasure) -> np.ndarray:
    """First moment ``sum_i w_i u_i``."""
    return mu.weights @ mu.atoms


@dataclass(frozen=True, eq=False)
class YoungControl:
    """Piecewise-constant transition measure: ``measures[k]`` on ``[t_k, t_{k+1})``."""

    grid: Grid
    measures: tuple

    def __post_init__(self):
        ms = tuple(self.measures)
        if len(ms) != self.grid.K:
            raise ValueError(f"expected {self.grid.K} measures, got {len(ms)}")
        object.__setattr__(self, "measures", ms)

    @property
    def m(self) -> int:
        return self.measures[0].atoms.shape[1]

    def barycenter_signal(self) -> ControlSignal:
        return ControlSignal(self.grid, np.array([barycenter(mu) for mu in self.measures]))


def dirac_embed(u: ControlSignal) -> YoungControl:
    """Young measure ``t -> delta(u(t))`` associated with an ordinary control."""
    return YoungControl(u.grid, tuple(DiscreteMeasure.dirac(v) for v in u.values))


def cost_Jhat(problem, traj, lam: YoungControl, check: bool = True) -> float:
    """``sum_k dt_k sum_i w_{k,i} L(t_k, x_k, u_{k,i})``."""
    if traj.grid != lam.grid:
        raise ValueError("trajectory and Young control live on different grids")
    if check:
        rep = young_support_check(problem, traj, lam)
        if not rep.ok:
            raise SupportViolation(rep.k, rep.i, rep.distance)
    total = 0.0
    for tk, dt, xk, mu in zip(traj.grid.times, traj.grid.steps, traj.states, lam.measures):
        vals = problem.cost(tk, xk[None, :], mu.atoms)
        total += dt * float(np.dot(mu.weights, vals))
    return float(total)


def test_family(m: int) -> dict:
    """Registered narrow-topology test functions ``phi(t, u)``.

    ``1``, ``u_j``, ``u_j u_l`` (``j <= l``), ``cos(pi t) u_j`` and ``|u|^2``.
    Each takes a time and an atom array of shape ``(p, m)``.
    """
    fam = {"1": lambda t, u: np.ones(len(u))}
    for j in range(m):
        fam[f"u_{j + 1}"] = lambda t, u, j=j: u[:, j]
        fam[f"cos(pi t) u_{j + 1}"] = lambda t, u, j=j: np.cos(np.pi * t) * u[:, j]
        for l in range(j, m):
            fam[f"u_{j + 1} u_{l + 1}"] = lambda t, u, j=j, l=l: u[:, j] * u[:, l]
    fam["|u|^2"] = lambda t, u: np.sum(u * u, axis=1)
    return fam


def narrow_functional(lam: YoungControl, phi) -> float:
    """``I_phi(lam) = sum_k dt_k sum_i w_{k,i} phi(t_k, u_{k,i})``."""
    total = 0.0
    for tk, dt, mu in zip(lam.grid.times, lam.grid.steps, lam.measures):
        total += dt * float(np.dot(mu.weights, phi(tk, mu.atoms)))
    return float(total)


@dataclass
class SupportReport:
    ok: bool
    k: int | None = None
    i: int | None = None
    distance: float = 0.0

    def __bool__(self):
        return self.ok


def young_support_check(problem, traj, lam: YoungControl) -> SupportReport:
    """Every atom of ``lam(t_k)`` must lie in ``U(t_k, x_k)``; barycenters are unconstrained."""
    worst = 0.0
    for k, (tk, xk, mu) in enumerate(zip(lam.grid.times, traj.states, lam.measures)):
        for i, a in enumerate(mu.atoms):
            d = set_distance(problem.controls, tk, xk, a)
            if d > SUPPORT_TOL:
                return SupportReport(False, k, i, d)
            worst = max(worst, d)
    return SupportReport(True, distance=worst)


def write_young_csv(lam: YoungControl, path) -> None:
    m = lam.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "t", "atom"] + [f"u_{j + 1}" for j in range(m)] + ["weight"])
        for k, (tk, mu) in enumerate(zip(lam.grid.times, lam.measures)):
            for i, (a, wt) in enumerate(zip(mu.atoms, mu.weights)):
                w.writerow([k, repr(float(tk)), i] + [repr(float(v)) for v in a] + [repr(float(wt))])


def read_young_csv(path, horizon: float) -> YoungControl:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    by_k: dict[int, list] = {}
    times = {}
    for r in rows:
        k = int(r[0])
        times[k] = float(r[1])
        by_k.setdefault(k, []).append([float(v) for v in r[3:]])
    ks = sorted(by_k)
    measures = []
    for k in ks:
        arr = np.array(by_k[k])
        measures.append(DiscreteMeasure(arr[:, :-1], arr[:, -1]))
    grid = Grid.from_times([times[k] for k in ks] + [horizon])
    return YoungControl(grid, tuple(measures))
