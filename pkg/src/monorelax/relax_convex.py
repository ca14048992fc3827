"""Convexified relaxation: the epigraph strip Gamma, the envelope L**, and the costs J, J_r.

The relaxed integrand is the lower boundary of the convex hull of
``{(u_i, L(t, x, u_i))}`` over a finite net of ``U(t, x)``, i.e. the value of
the small linear program::

    min  sum_i alpha_i * eta_i
    s.t. sum_i alpha_i * u_i = u,  sum_i alpha_i = 1,  alpha >= 0

which is ``+inf`` exactly when ``u`` leaves the convex hull of the net.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .controls import ControlSignal, sample_atoms, set_distance
from .errors import CapViolation, ControlBoundError, HypothesisError, InadmissiblePair
from .grid import StepProfile
from .simplex import convex_weights, hull_distance

__all__ = [
    "CostSpec",
    "GammaSample",
    "gamma_sample",
    "lower_envelope",
    "biconjugate",
    "cost_J",
    "cost_Jr",
    "AdmissibilityReport",
    "check_admissible",
    "write_envelope_csv",
]

PENALTIES = {
    "zero": lambda u: np.zeros(u.shape[:-1]),
    "square": lambda u: np.sum(u * u, axis=-1),
    "abs": lambda u: np.sum(np.abs(u), axis=-1),
    "double_well": lambda u: (1.0 - np.sum(u * u, axis=-1)) ** 2,
}

TOL_U = 1e-8
TOL_X = 1e-8


@dataclass(frozen=True, eq=False)
class CostSpec:
    """Running cost ``L(t, x, u)``.

    kind
        ``"quadratic"``: ``(x - x_ref)^T Q (x - x_ref) + penalty_weight * w(u)``
        with ``w`` one of ``zero``, ``square``, ``abs``, ``double_well``
        (``(1 - |u|^2)^2``).
        ``"polynomial"``: ``sum coef * prod x_i^p_i * prod u_j^q_j`` over
        ``terms = [(coef, x_powers, u_powers), ...]``.
    bound_radius, bound
        Declared ``a_r``: ``|L(t, x, u)| <= bound(t)`` for ``|x|, |u| <= bound_radius``.
    lipschitz
        Declared ``theta_r`` at the same radius.
    """

    kind: str
    bound_radius: float
    bound: StepProfile
    lipschitz: StepProfile
    Q: np.ndarray | None = None
    x_ref: np.ndarray | None = None
    penalty: str = "zero"
    penalty_weight: float = 1.0
    terms: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "quadratic":
            Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
            object.__setattr__(self, "Q", Q)
            ref = np.zeros(Q.shape[0]) if self.x_ref is None else self.x_ref
            object.__setattr__(self, "x_ref", np.atleast_1d(np.asarray(ref, dtype=float)))
            if self.penalty not in PENALTIES:
                raise ValueError(f"unknown penalty {self.penalty!r}")
        elif self.kind == "polynomial":
            terms = tuple((float(c), tuple(int(p) for p in xp), tuple(int(q) for q in up))
                          for c, xp, up in self.terms)
            object.__setattr__(self, "terms", terms)
        else:
            raise ValueError(f"unknown cost kind {self.kind!r}")

    def __call__(self, t, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.kind == "quadratic":
            d = x - self.x_ref
            xq = np.einsum("...i,ij,...j->...", d, self.Q, d)
            return xq + self.penalty_weight * PENALTIES[self.penalty](u)
        shape = np.broadcast_shapes(x.shape[:-1], u.shape[:-1])
        out = np.zeros(shape)
        for coef, xp, up in self.terms:
            term = np.full(shape, coef)
            for i, p in enumerate(xp):
                if p:
                    term = term * x[..., i] ** p
            for j, q in enumerate(up):
                if q:
                    term = term * u[..., j] ** q
            out = out + term
        return out


def _cap(problem, t) -> float:
    c_hat = problem.c_hat
    r_needed = max(c_hat, problem.controls.M)
    if problem.cost.bound_radius < r_needed:
        raise HypothesisError(
            f"declared cost bound radius {problem.cost.bound_radius:.6g} is below "
            f"max(c_hat, M) = {r_needed:.6g}",
            {"bound_radius": problem.cost.bound_radius, "required": r_needed})
    return problem.cost.bound(t)


@dataclass(frozen=True, eq=False)
class GammaSample:
    """Lower boundary points ``(u_i, L(t, x, u_i))`` of the strip ``Gamma(t, x)``."""

    t: float
    x: np.ndarray
    atoms: np.ndarray
    etas: np.ndarray
    cap: float

    @property
    def pairs(self):
        return [(u.copy(), float(e)) for u, e in zip(self.atoms, self.etas)]


def gamma_sample(problem, t: float, x, n: int | None = None) -> GammaSample:
    """Sample ``Gamma(t, x)`` at its lower boundary ``eta = L(t, x, u)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c_hat = problem.c_hat
    if np.linalg.norm(x) > c_hat + 1e-6:
        raise HypothesisError(f"|x| = {np.linalg.norm(x):.6g} exceeds the a-priori bound {c_hat:.6g}",
                              {"t": t, "x": x.tolist(), "c_hat": c_hat})
    n = problem.n_atoms if n is None else n
    atoms = sample_atoms(problem.controls, t, x, n)
    etas = np.asarray(problem.cost(t, x[None, :], atoms), dtype=float)
    cap = _cap(problem, t)
    over = np.nonzero(etas > cap)[0]
    if len(over):
        i = int(over[0])
        raise CapViolation(
            f"L(t, x, u) = {etas[i]:.6g} exceeds the cap {cap:.6g}",
            {"t": t, "x": x.tolist(), "u": atoms[i].tolist(), "L": float(etas[i])})
    return GammaSample(float(t), x, atoms, etas, float(cap))


def _envelope_1d(us, etas, u):
    order = np.lexsort((etas, us))
    us_s, et_s, idx_s = us[order], etas[order], order
    first = np.concatenate([[True], us_s[1:] != us_s[:-1]])
    us_s, et_s, idx_s = us_s[first], et_s[first], idx_s[first]
    lo, hi = us_s[0], us_s[-1]
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if u < lo - tol or u > hi + tol:
        return math.inf, None
    u = min(max(u, lo), hi)
    hull = []
    for j in range(len(us_s)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = ((us_s[b] - us_s[a]) * (et_s[j] - et_s[a])
                     - (et_s[b] - et_s[a]) * (us_s[j] - us_s[a]))
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(j)
    weights = np.zeros(len(us))
    hx = us_s[hull]
    pos = int(np.searchsorted(hx, u, side="left"))
    if pos < len(hull) and hx[pos] == u:
        j = hull[pos]
        weights[idx_s[j]] = 1.0
        return float(et_s[j]), weights
    a, b = hull[pos - 1], hull[pos]
    s = (u - us_s[a]) / (us_s[b] - us_s[a])
    weights[idx_s[a]] = 1.0 - s
    weights[idx_s[b]] = s
    return float((1.0 - s) * et_s[a] + s * et_s[b]), weights


def lower_envelope(atoms, etas, u):
    """Value and optimal weights of the convex envelope of ``(atoms, etas)`` at ``u``.

    One-dimensional controls use the lower convex hull of the sorted atoms;
    higher dimensions solve the equality-constrained LP with Bland's rule.
    Returns ``(inf, None)`` outside the convex hull of the atoms.
    """
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    etas = np.asarray(etas, dtype=float)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if atoms.shape[1] == 1:
        return _envelope_1d(atoms[:, 0], etas, float(u[0]))
    weights, value = convex_weights(atoms, u, etas)
    return value, weights


def biconjugate(problem, t: float, x, u, n: int | None = None) -> float:
    """``L**(t, x, u)`` over the sampled net; ``math.inf`` outside its convex hull."""
    g = gamma_sample(problem, t, x, n)
    value, _ = lower_envelope(g.atoms, g.etas, u)
    return value


def _same_grid(traj, u):
    if traj.grid != u.grid:
        raise ValueError("trajectory and control live on different grids")


def cost_J(problem, traj, u: ControlSignal, check: bool = True) -> float:
    """Left-rectangle quadrature of ``L(t_k, x_k, u_k)``.

    With ``check=True`` the pair must be admissible for the original system.
    """
    _same_grid(traj, u)
    if check:
        rep = check_admissible(problem, traj, u, "original")
        if not rep.ok:
            raise InadmissiblePair(rep)
    t = traj.grid.times[:-1]
    vals = np.array([problem.cost(tk, xk, uk)
                     for tk, xk, uk in zip(t, traj.states[:-1], u.values)])
    return float(np.dot(traj.grid.steps, vals))


def cost_Jr(problem, traj, u: ControlSignal, n: int | None = None) -> float:
    """Relaxed cost ``sum_k dt_k L**(t_k, x_k, u_k)``; ``inf`` if any step is infeasible."""
    _same_grid(traj, u)
    total = 0.0
    for tk, dt, xk, uk in zip(traj.grid.times, traj.grid.steps, traj.states, u.values):
        v = biconjugate(problem, tk, xk, uk, n)
        if math.isinf(v):
            return math.inf
        total += dt * v
    return float(total)


@dataclass
class AdmissibilityReport:
    ok: bool
    mode: str
    reason: str = ""
    index: int | None = None
    max_control_distance: float = 0.0
    max_state_error: float = 0.0

    def __bool__(self):
        return self.ok


def check_admissible(problem, traj, u: ControlSignal, mode: str = "original",
                     n: int | None = None) -> AdmissibilityReport:
    """Check membership of ``(x, u)`` in ``P`` (``mode="original"``) or ``P_c``.

    The trajectory must reproduce the discrete recursion driven by ``u``
    within ``1e-8`` and every ``u_k`` must lie within ``1e-8`` of
    ``U(t_k, x_k)`` (original) or of the convex hull of its net (convexified).
    """
    from .dynamics import solve_controlled

    if mode not in ("original", "convexified"):
        raise ValueError(f"unknown mode {mode!r}")
    if traj.grid != u.grid:
        return AdmissibilityReport(False, mode, "trajectory and control grids differ")
    n = problem.n_atoms if n is None else n
    times = traj.grid.times

    dists = np.empty(u.grid.K)
    for k in range(u.grid.K):
        if mode == "original":
            dists[k] = set_distance(problem.controls, times[k], traj.states[k], u.values[k])
        else:
            net = sample_atoms(problem.controls, times[k], traj.states[k], n)
            dists[k] = hull_distance(net, u.values[k])
    max_d = float(dists.max())

    try:
        replay = solve_controlled(problem, u)
    except (ControlBoundError, HypothesisError) as exc:
        idx = getattr(exc, "index", 0)
        return AdmissibilityReport(False, mode, str(exc), idx, max_d)
    err = np.linalg.norm(replay.states - traj.states, axis=1)
    max_e = float(err.max())

    bad_x = np.nonzero(err > TOL_X)[0]
    bad_u = np.nonzero(dists > TOL_U)[0]
    first_x = int(bad_x[0]) if len(bad_x) else None
    first_u = int(bad_u[0]) if len(bad_u) else None
    if first_x is None and first_u is None:
        return AdmissibilityReport(True, mode, "", None, max_d, max_e)
    # a state failure at node k is caused by the control on interval k - 1
    if first_u is not None and (first_x is None or first_u < first_x):
        return AdmissibilityReport(
            False, mode, f"control on interval {first_u} is {dists[first_u]:.3e} away from the "
            f"{'control set' if mode == 'original' else 'convexified control set'}",
            first_u, max_d, max_e)
    return AdmissibilityReport(
        False, mode, f"state at node {first_x} deviates {err[first_x]:.3e} from the dynamics",
        first_x, max_d, max_e)


def write_envelope_csv(problem, t: float, x, path, points: int = 201, n: int | None = None) -> None:
    """Tabulate ``u, L(t, x, u), L**(t, x, u)`` on a uniform ``u`` grid (``m = 1``)."""
    if problem.m != 1:
        raise ValueError("envelope dump is only defined for scalar controls")
    g = gamma_sample(problem, t, x, n)
    lo, hi = g.atoms.min(), g.atoms.max()
    pad = 0.1 * max(hi - lo, 1.0)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "L", "L_biconjugate"])
        for uu in np.linspace(lo - pad, hi + pad, points):
            L = float(problem.cost(t, x, np.array([uu])))
            env, _ = lower_envelope(g.atoms, g.etas, [uu])
            w.writerow([repr(float(uu)), repr(L), "inf" if math.isinf(env) else repr(env)])
