"""Probability-simplex utilities: Euclidean projection and a small dense LP solver."""

from __future__ import annotations

import numpy as np

__all__ = ["project_simplex", "linprog_bland", "convex_weights", "hull_distance"]

PIVOT_TOL = 1e-12
FEAS_TOL = 1e-10


def project_simplex(v) -> np.ndarray:
    """Project each row of ``v`` onto the probability simplex (sorting method)."""
    v = np.asarray(v, dtype=float)
    flat = v.reshape(-1, v.shape[-1])
    n = flat.shape[1]
    s = -np.sort(-flat, axis=1)
    css = np.cumsum(s, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = s - css / idx > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(len(flat)), rho] / (rho + 1)
    out = np.maximum(flat - theta[:, None], 0.0)
    return out.reshape(v.shape)


def _pivot(T, basis, r, c):
    T[r] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0.0:
            T[i] -= T[i, c] * T[r]
    basis[r] = c


def _run(T, basis, ncols, max_iter=10_000):
    for _ in range(max_iter):
        red = T[-1, :ncols]
        cand = np.nonzero(red < -PIVOT_TOL)[0]
        if len(cand) == 0:
            return True
        c = int(cand[0])  # Bland: lowest index enters
        col = T[:-1, c]
        rows = np.nonzero(col > PIVOT_TOL)[0]
        if len(rows) == 0:
            raise RuntimeError("unbounded LP")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))  # Bland: lowest basic index leaves
        _pivot(T, basis, r, c)
    raise RuntimeError("simplex iteration cap reached")


def linprog_bland(c, A, b):
    """Solve ``min c.x`` s.t. ``A x = b``, ``x >= 0`` by two-phase tableau simplex.

    Bland's rule is used in both phases, so the method terminates on
    degenerate problems.  Returns ``(x, value)``, or ``(None, inf)`` when the
    constraints are infeasible.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    rows, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    T = np.zeros((rows + 1, n + rows + 1))
    T[:rows, :n] = A
    T[:rows, n:n + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[-1, n:n + rows] = 1.0
    T[-1] -= T[:rows].sum(axis=0)
    basis = list(range(n, n + rows))
    _run(T, basis, n + rows)
    if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        return None, np.inf

    # drive artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(rows):
        if basis[i] >= n:
            nz = np.nonzero(np.abs(T[i, :n]) > PIVOT_TOL)[0]
            if len(nz) == 0:
                continue
            _pivot(T, basis, i, int(nz[0]))
        keep.append(i)
    T2 = np.vstack([T[keep][:, list(range(n)) + [T.shape[1] - 1]], np.zeros(n + 1)])
    basis2 = [basis[i] for i in keep]
    T2[-1, :n] = c
    for i, j in enumerate(basis2):
        T2[-1] -= c[j] * T2[i]
    _run(T2, basis2, n)
    x = np.zeros(n)
    for i, j in enumerate(basis2):
        x[j] = max(T2[i, -1], 0.0)
    return x, float(c @ x)


def convex_weights(points, target, costs=None):
    """Cheapest convex weights ``alpha`` with ``alpha @ points = target``.

    Returns ``(alpha, cost)`` or ``(None, inf)`` if ``target`` is outside the
    convex hull of ``points``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    costs = np.zeros(len(P)) if costs is None else np.asarray(costs, dtype=float)
    A = np.vstack([P.T, np.ones(len(P))])
    b = np.append(target, 1.0)
    return linprog_bland(costs, A, b)


def hull_distance(points, target, iters: int = 2000) -> float:
    """Euclidean distance from ``target`` to the convex hull of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if P.shape[1] == 1:
        u = target[0]
        return float(max(P.min() - u, u - P.max(), 0.0))
    alpha, _ = convex_weights(P, target)
    if alpha is not None:
        return 0.0
    # accelerated projected gradient on min |alpha @ P - target|^2 over the simplex
    L = max(np.linalg.norm(P, 2) ** 2, 1e-12)
    a = np.full(len(P), 1.0 / len(P))
    y, tk = a.copy(), 1.0
    for _ in range(iters):
        g = P @ (y @ P - target)
        a_new = project_simplex(y - g / L)
        tk1 = 0.5 * (1 + np.sqrt(1 + 4 * tk * tk))
        y = a_new + ((tk - 1) / tk1) * (a_new - a)
        a, tk = a_new, tk1
    return float(np.linalg.norm(a @ P - target))
