"""Direct transcription of the relaxed problems over per-interval simplex weights.

Decision variables are weights ``alpha[k, i]`` on the net of ``U(t_k, x_k)``.
The state is driven by the barycenter ``sum_i alpha[k, i] u_{k,i}`` and the
objective is ``sum_k dt sum_i alpha[k, i] L(t_k, x_k, u_{k,i})``.  This single
inner problem serves both relaxations: its barycenters are controls of the
convexified system, and the weights themselves are Young controls.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .chattering import convergence_table, write_convergence_csv
from .controls import ControlSignal, atoms_batch, sample_atoms
from .dynamics import Trajectory, solve_young
from .grid import Grid
from .monotone import resolvent
from .relax_convex import cost_Jr, lower_envelope
from .relax_young import DiscreteMeasure, YoungControl, cost_Jhat
from .simplex import project_simplex

__all__ = [
    "SolverOptions",
    "RelaxedSolution",
    "RelaxationReport",
    "rollout_cost",
    "solve_relaxed",
    "estimate_original",
    "write_trace_csv",
    "write_report",
]

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 5000
    fd_step: float = 1e-6
    tol: float = 1e-10
    window: int = 20
    armijo: float = 1e-4
    max_backtracks: int = 40


def rollout_cost(problem, grid: Grid, alpha: np.ndarray, n: int) -> np.ndarray:
    """Transcription objective for a batch of weight arrays ``alpha`` of shape (B, K, n_atoms)."""
    alpha = np.asarray(alpha, dtype=float)
    B = alpha.shape[0]
    op, fld, cost, U = problem.operator, problem.field, problem.cost, problem.controls
    x = np.broadcast_to(problem.x0, (B, problem.N)).copy()
    J = np.zeros(B)
    for k, (t, dt) in enumerate(zip(grid.times[:-1], grid.steps)):
        atoms = atoms_batch(U, t, x, n)
        a = alpha[:, k, :]
        bary = np.einsum("bi,bij->bj", a, atoms)
        J += dt * np.einsum("bi,bi->b", a, cost(t, x[:, None, :], atoms))
        x = resolvent(op, dt, x - dt * fld.apply(t, x, bary))
    return J


def _fd_gradient(problem, grid, alpha, n, h):
    shape = alpha.shape
    D = alpha.size
    batch = np.repeat(alpha[None], 2 * D, axis=0).reshape(2 * D, D)
    idx = np.arange(D)
    batch[idx, idx] += h
    batch[D + idx, idx] -= h
    vals = rollout_cost(problem, grid, batch.reshape((2 * D,) + shape), n)
    return ((vals[:D] - vals[D:]) / (2 * h)).reshape(shape)


@dataclass
class _Run:
    alpha: np.ndarray
    value: float
    converged: bool
    trace: list


def _projected_gradient(problem, grid, alpha0, n, opts: SolverOptions) -> _Run:
    f = lambda a: float(rollout_cost(problem, grid, a[None], n)[0])
    alpha = project_simplex(alpha0)
    val = f(alpha)
    trace = [(0, val, 0.0)]
    history = [val]
    step = 1.0
    prev_alpha = prev_grad = None
    converged = False
    for it in range(1, opts.max_iter + 1):
        g = _fd_gradient(problem, grid, alpha, n, opts.fd_step)
        if prev_grad is not None:
            # spectral (Barzilai-Borwein) trial step, safeguarded
            s = (alpha - prev_alpha).ravel()
            y = (g - prev_grad).ravel()
            sy = float(s @ y)
            step = float(s @ s) / sy if sy > 1e-16 else min(2.0 * step, 1e6)
            step = min(max(step, 1e-8), 1e6)
        accepted = False
        for _ in range(opts.max_backtracks):
            cand = project_simplex(alpha - step * g)
            d = cand - alpha
            if not np.any(d):
                break
            new = f(cand)
            if new <= val + opts.armijo * float(np.sum(g * d)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        prev_alpha, prev_grad = alpha, g
        alpha, val = cand, new
        trace.append((it, val, step))
        history.append(val)
        if len(history) > opts.window and history[-opts.window - 1] - val < opts.tol:
            converged = True
            break
    return _Run(alpha, val, converged, trace)


def _starts(K, n_atoms):
    yield "uniform", np.full((K, n_atoms), 1.0 / n_atoms)
    for i in range(n_atoms):
        a = np.zeros((K, n_atoms))
        a[:, i] = 1.0
        yield f"vertex_{i}", a


def _polish(problem, grid, alpha, n):
    """Replace each interval's weights by the cheapest ones with the same barycenter.

    The barycenters and hence the state sequence are unchanged; the
    objective drops to the sampled envelope value at every interval.
    """
    x = problem.x0.copy()
    out = alpha.copy()
    for k, (t, dt) in enumerate(zip(grid.times[:-1], grid.steps)):
        atoms = sample_atoms(problem.controls, t, x, n)
        etas = problem.cost(t, x[None, :], atoms)
        bary = alpha[k] @ atoms
        val, w = lower_envelope(atoms, etas, bary)
        if w is not None and val <= float(alpha[k] @ etas):
            out[k] = w / w.sum()
        x = resolvent(problem.operator, dt, x - dt * problem.field.apply(t, x, bary))
    return out


@dataclass
class RelaxedSolution:
    """Optimal relaxed pair.

    ``value`` is the cost reported for ``mode`` (``J_r`` of the barycenter
    signal for ``"convexified"``, ``J_hat`` of the Young control for
    ``"young"``); ``m_r`` and ``m_hat_r`` carry both.
    """

    mode: str
    trajectory: Trajectory
    young: YoungControl
    barycenter: ControlSignal
    value: float
    m_r: float
    m_hat_r: float
    objective: float
    weights: np.ndarray
    converged: bool
    trace: list
    ties: list = field(default_factory=list)
    starts: dict = field(default_factory=dict)

    @property
    def control(self):
        return self.barycenter if self.mode == "convexified" else self.young


def solve_relaxed(problem, grid: Grid | None = None, n: int | None = None,
                  mode: str = "young", options: SolverOptions | None = None) -> RelaxedSolution:
    """Minimize the transcribed relaxed cost.

    Projected gradient with central finite-difference sensitivities,
    Euclidean simplex projection, Armijo backtracking from a spectral trial
    step, and multi-start from uniform weights and every vertex.  The best
    start is polished onto the envelope and reported.

    Parameters
    ----------
    problem : Problem
    grid : Grid, optional
        Base grid; defaults to ``problem.grid``.
    n : int, optional
        Net size for ``U(t, x)``; defaults to ``problem.n_atoms``.
    mode : {"convexified", "young"}
    options : SolverOptions, optional
    """
    if mode not in ("convexified", "young"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = problem.grid if grid is None else grid
    n = problem.n_atoms if n is None else n
    opts = options or SolverOptions()
    n_atoms = len(sample_atoms(problem.controls, 0.0, problem.x0, n))

    runs = {}
    for name, a0 in _starts(grid.K, n_atoms):
        runs[name] = _projected_gradient(problem, grid, a0, n, opts)
        log.debug("start %s: value %.3e converged=%s iters=%d", name, runs[name].value,
                  runs[name].converged, len(runs[name].trace) - 1)
    best_name = min(runs, key=lambda k: runs[k].value)
    best = runs[best_name]
    ties = [k for k, r in runs.items()
            if k != best_name and abs(r.value - best.value) <= TIE_TOL
            and not np.allclose(r.alpha, best.alpha, atol=1e-6)]

    alpha = _polish(problem, grid, best.alpha, n)
    objective = float(rollout_cost(problem, grid, alpha[None], n)[0])

    # Young control on the same atoms the transcription used
    x = problem.x0.copy()
    measures = []
    for k, (t, dt) in enumerate(zip(grid.times[:-1], grid.steps)):
        atoms = sample_atoms(problem.controls, t, x, n)
        mu = DiscreteMeasure.from_weights(atoms, alpha[k])
        measures.append(mu)
        bary = mu.weights @ mu.atoms
        x = resolvent(problem.operator, dt, x - dt * problem.field.apply(t, x, bary))
    lam = YoungControl(grid, tuple(measures))
    traj = solve_young(problem, lam)
    bary_signal = lam.barycenter_signal()
    m_hat_r = cost_Jhat(problem, traj, lam)
    m_r = cost_Jr(problem, traj, bary_signal, n)
    value = m_r if mode == "convexified" else m_hat_r
    return RelaxedSolution(mode, traj, lam, bary_signal, value, m_r, m_hat_r, objective,
                           alpha, best.converged, best.trace, ties,
                           {k: (r.value, r.converged) for k, r in runs.items()})


@dataclass
class RelaxationReport:
    m_r: float
    m_hat_r: float
    m_estimate: float
    table: list
    solution: RelaxedSolution
    converged: bool
    ties: list

    def summary_lines(self) -> list[str]:
        lines = [
            f"m_r = {self.m_r!r}",
            f"m_hat_r = {self.m_hat_r!r}",
            f"m_estimate = {self.m_estimate!r}",
            f"converged = {self.converged}",
            f"ties = {','.join(self.ties) if self.ties else 'none'}",
        ]
        for r in self.table:
            lines.append(f"n={r.n} weak_gap={r.weak_gap!r} state_gap={r.state_gap!r} "
                         f"J={r.J!r} gap_to_mr={r.gap_to_mr!r}")
        return lines


def estimate_original(problem, relaxed: RelaxedSolution, n_list, sim_K: int | None = None,
                      merge: bool = True) -> RelaxationReport:
    """Upper estimate of the original infimum from chattered, feedback-corrected pairs."""
    table = convergence_table(problem, relaxed.trajectory, relaxed.young, n_list,
                              m_r=relaxed.m_r, sim_K=sim_K, merge=merge)
    m_est = min((r.J for r in table), default=math.inf)
    return RelaxationReport(float(relaxed.m_r), float(relaxed.m_hat_r), float(m_est), table, relaxed,
                            relaxed.converged, relaxed.ties)


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "objective", "step"])
        for it, val, step in trace:
            w.writerow([it, repr(float(val)), repr(float(step))])


def write_report(report: RelaxationReport, summary_path, table_path=None) -> None:
    with open(summary_path, "w") as fh:
        fh.write("\n".join(report.summary_lines()) + "\n")
    if table_path is not None:
        write_convergence_csv(report.table, table_path)

