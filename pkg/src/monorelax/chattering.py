"""Realizing relaxed controls by ordinary ones.

A Young control is turned into a time-sharing (chattering) signal whose
average over every cycle is the barycenter, and the chattered values are
then projected onto ``U(t, x)`` along the actual state so the result is
admissible for the original system.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .controls import ControlSignal, nearest_point, weak_norm
from .dynamics import Trajectory, _march
from .errors import VnViolation
from .grid import Grid, merge_times
from .relax_convex import cost_J
from .relax_young import YoungControl, cost_Jhat, dirac_embed

__all__ = [
    "ChatterPlan",
    "chatter_plan",
    "chatter_realize",
    "FeedbackResult",
    "feedback_correct",
    "ConvergenceRow",
    "convergence_table",
    "write_convergence_csv",
]

MERGE_TOL = 1e-9
VN_TOL = 1e-6


@dataclass(frozen=True)
class ChatterPlan:
    """Blocks of base intervals sharing one measure, each cycled ``cycles`` times.

    ``blocks[j] = (k_start, k_stop)`` covers base intervals
    ``k_start <= k < k_stop``; atoms are visited in index order.
    """

    grid: Grid
    cycles: int
    blocks: tuple


def _same_measure(a, b, tol=MERGE_TOL) -> bool:
    return (a.atoms.shape == b.atoms.shape
            and np.allclose(a.atoms, b.atoms, rtol=0, atol=tol)
            and np.allclose(a.weights, b.weights, rtol=0, atol=tol))


def chatter_plan(lam: YoungControl, n: int, merge: bool = False) -> ChatterPlan:
    if n < 1:
        raise ValueError("number of cycles must be >= 1")
    blocks = []
    start = 0
    for k in range(1, lam.grid.K + 1):
        if k == lam.grid.K or not merge or not _same_measure(lam.measures[start], lam.measures[k]):
            blocks.append((start, k))
            start = k
    return ChatterPlan(lam.grid, int(n), tuple(blocks))


def chatter_realize(lam: YoungControl, n: int, merge: bool = False) -> ControlSignal:
    """Ordinary control cycling ``n`` times through the atoms of each interval.

    Within every base interval of length ``dt`` atom ``i`` is held for
    ``w_i * dt / n`` per cycle, so the time average over the interval is the
    barycenter.  With ``merge=True`` consecutive intervals carrying the same
    measure form one block and the ``n`` cycles span the whole block.
    Zero-weight atoms are skipped.
    """
    plan = chatter_plan(lam, n, merge)
    times = lam.grid.times
    out_t = [0.0]
    out_v = []
    for k0, k1 in plan.blocks:
        mu = lam.measures[k0]
        t0, t1 = times[k0], times[k1]
        span = t1 - t0
        live = [(a, w) for a, w in zip(mu.atoms, mu.weights) if w > 0.0]
        acc = 0.0
        for _ in range(n):
            for a, w in live:
                acc += w / n
                out_t.append(t0 + span * acc)
                out_v.append(a)
        out_t[-1] = t1
    out_t = np.array(out_t)
    out_v = np.array(out_v)
    # tiny weights can round to empty pieces; they carry no time and are dropped
    live = np.diff(out_t) > 1e-13 * lam.grid.b
    starts, out_v = out_t[:-1][live], out_v[live]
    # collapse repeated values so a single atom yields a single piece
    keep = np.ones(len(out_v), dtype=bool)
    keep[1:] = np.any(out_v[1:] != out_v[:-1], axis=1)
    grid = Grid.from_times(np.append(starts[keep], out_t[-1]))
    return ControlSignal(grid, out_v[keep])


class FeedbackResult(NamedTuple):
    trajectory: Trajectory
    control: ControlSignal
    max_slack: float


def feedback_correct(problem, target: ControlSignal, n: int,
                     reference: Trajectory | None = None,
                     sim_K: int | None = None) -> FeedbackResult:
    """Simulate the original system with ``v = proj_{U(t, x)}(target)``.

    The simulation mesh is the common refinement of the target's breakpoints,
    the reference grid and, if given, a uniform grid with ``sim_K`` steps.
    When a reference trajectory is supplied, the selection is checked
    against ``|v - target| <= k(t) |x_ref - x| + 1/n`` at every step, where
    ``x_ref`` is the reference state at the base node at which the target
    atom was sampled; ``max_slack`` is the largest value of
    ``|v - target| - k(t) |x_ref - x|``.
    """
    parts = [target.grid]
    if reference is not None:
        parts.append(reference.grid)
    if sim_K:
        parts.append(Grid(target.grid.b, sim_K))
    grid = merge_times(*parts) if len(parts) > 1 else target.grid
    tv = target.resample(grid).values if grid != target.grid else target.values
    U = problem.controls
    field = problem.field
    times = grid.times
    chosen = np.empty_like(tv)
    slack = [-np.inf]

    def forcing(j, x):
        t = times[j]
        v = nearest_point(U, t, x, tv[j])
        chosen[j] = v
        if reference is not None:
            k = int(reference.grid.interval_index(t))
            gap = float(np.linalg.norm(v - tv[j]) - U.k(t) * np.linalg.norm(reference.states[k] - x))
            slack[0] = max(slack[0], gap)
            if gap > 1.0 / n + VN_TOL:
                raise VnViolation(j, gap - 1.0 / n)
        return field.apply(t, x, v)

    traj = _march(problem.operator, problem.x0, grid, forcing)
    return FeedbackResult(traj, ControlSignal(grid, chosen), float(max(slack[0], 0.0)))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    weak_gap: float
    state_gap: float
    J: float
    gap_to_mr: float


def convergence_table(problem, relaxed_traj: Trajectory, relaxed_control, n_list,
                      m_r: float | None = None, sim_K: int | None = None,
                      merge: bool = True) -> list[ConvergenceRow]:
    """Chatter, correct and evaluate the relaxed pair for each cycle count in ``n_list``.

    Columns: weak-norm distance between the corrected control and the
    relaxed barycenter, sup-norm state gap, original cost ``J`` and
    ``|J - m_r|`` (``m_r`` defaults to the relaxed cost of the given pair).
    """
    lam = relaxed_control if isinstance(relaxed_control, YoungControl) else dirac_embed(relaxed_control)
    bary = lam.barycenter_signal()
    if m_r is None:
        m_r = cost_Jhat(problem, relaxed_traj, lam)
    rows = []
    for n in sorted(int(v) for v in n_list):
        signal = chatter_realize(lam, n, merge=merge)
        traj, v, _ = feedback_correct(problem, signal, n, reference=relaxed_traj, sim_K=sim_K)
        weak_gap = weak_norm(v - bary)
        state_gap = float(np.linalg.norm(traj.states - relaxed_traj.at(traj.grid.times), axis=1).max())
        J = cost_J(problem, traj, v)
        rows.append(ConvergenceRow(n, float(weak_gap), state_gap, float(J), float(abs(J - m_r))))
    return rows


def write_convergence_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "weak_gap", "state_gap", "J", "gap_to_mr"])
        for r in rows:
            w.writerow([r.n, repr(r.weak_gap), repr(r.state_gap), repr(r.J), repr(r.gap_to_mr)])
