"""Control constraint sets ``U(t, x)``, ordinary control signals, and the weak norm."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .grid import Grid, StepProfile

__all__ = [
    "ControlSetSpec",
    "ControlSignal",
    "sample_atoms",
    "atoms_batch",
    "nearest_point",
    "set_distance",
    "hausdorff",
    "weak_norm",
    "lipschitz_probe",
    "write_signal_csv",
    "read_signal_csv",
]

SATURATIONS = {
    "none": lambda x: x,
    "tanh": np.tanh,
    "clip": lambda x: np.clip(x, -1.0, 1.0),
}


@dataclass(frozen=True, eq=False)
class ControlSetSpec:
    """Compact control constraint set, possibly translated by the state.

    kind
        ``"finite_atoms"`` (``atoms`` of shape ``(p, m)``, shifted by
        ``kappa @ sat(x)``), ``"box"`` (``lo``, ``hi``) or ``"ball"``
        (``center``, ``radius``).
    a0, k
        Declared bound profile ``sup |U(t,x)| <= a0(t)`` and Hausdorff
        Lipschitz profile ``k(t)``.
    """

    kind: str
    m: int
    a0: StepProfile
    k: StepProfile
    atoms: np.ndarray | None = None
    kappa: np.ndarray | None = None
    saturation: str = "none"
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        m = self.m
        if self.kind == "finite_atoms":
            atoms = np.asarray(self.atoms, dtype=float).reshape(-1, m)
            if len(atoms) == 0:
                raise ValueError("finite_atoms needs at least one atom")
            object.__setattr__(self, "atoms", atoms)
            if self.kappa is not None:
                kap = np.asarray(self.kappa, dtype=float)
                if kap.ndim == 0:
                    kap = kap * np.eye(m)
                object.__setattr__(self, "kappa", np.atleast_2d(kap))
            if self.saturation not in SATURATIONS:
                raise ValueError(f"unknown saturation {self.saturation!r}")
        elif self.kind == "box":
            lo = np.asarray(self.lo, dtype=float).reshape(m)
            hi = np.asarray(self.hi, dtype=float).reshape(m)
            if np.any(lo > hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise ValueError("box needs finite lo <= hi")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball":
            c = np.asarray(self.center, dtype=float).reshape(m)
            if not self.radius or self.radius < 0:
                raise ValueError("ball radius must be positive")
            object.__setattr__(self, "center", c)
        else:
            raise ValueError(f"unknown control set kind {self.kind!r}")

    @property
    def M(self) -> float:
        """Radius of the ball containing every ``U(t, x)``."""
        return self.a0.sup()

    @property
    def state_dependent(self) -> bool:
        return self.kind == "finite_atoms" and self.kappa is not None

    def shift(self, x) -> np.ndarray:
        """Translation ``kappa @ sat(x)``, shape ``(..., m)``."""
        x = np.asarray(x, dtype=float)
        if not self.state_dependent:
            return np.zeros(x.shape[:-1] + (self.m,))
        return SATURATIONS[self.saturation](x) @ self.kappa.T


def _box_net(lo, hi, n):
    m = len(lo)
    if m == 1:
        return np.linspace(lo[0], hi[0], max(n, 2)).reshape(-1, 1)
    per_axis = 2
    while (per_axis + 1) ** m <= n:
        per_axis += 1
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(m)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=-1)


def _ball_net(center, radius, n):
    m = len(center)
    if m == 1:
        return np.linspace(center[0] - radius, center[0] + radius, max(n, 2)).reshape(-1, 1)
    if m == 2:
        q = max(n - 1, 3)
        ang = 2.0 * np.pi * np.arange(q) / q
        ring = center + radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return np.vstack([center[None, :], ring])
    eye = np.eye(m)
    return np.vstack([center[None, :], center + radius * eye, center - radius * eye])


def sample_atoms(spec: ControlSetSpec, t: float, x, n: int) -> np.ndarray:
    """Finite net of ``U(t, x)`` used for every hull and envelope computation.

    ``finite_atoms`` returns the (translated) atoms and ignores ``n``.  Boxes
    return a tensor grid containing the vertices; balls return the center
    plus ``n - 1`` equi-angular boundary points when ``m = 2`` and the two
    extreme points (plus interior points) when ``m = 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.kind == "finite_atoms":
        return spec.atoms + spec.shift(np.asarray(x, dtype=float))
    if spec.kind == "box":
        return _box_net(spec.lo, spec.hi, n)
    return _ball_net(spec.center, spec.radius, n)


def atoms_batch(spec: ControlSetSpec, t: float, X, n: int) -> np.ndarray:
    """Vectorized :func:`sample_atoms` for states ``X`` of shape ``(B, N)``."""
    X = np.asarray(X, dtype=float)
    if spec.kind == "finite_atoms":
        return spec.atoms[None, :, :] + spec.shift(X)[:, None, :]
    base = sample_atoms(spec, t, X[0], n)
    return np.broadcast_to(base, (X.shape[0],) + base.shape)


def nearest_point(spec: ControlSetSpec, t: float, x, target) -> np.ndarray:
    """Metric projection of ``target`` onto ``U(t, x)``.

    Ties between equidistant atoms go to the lexicographically smallest one.
    """
    target = np.asarray(target, dtype=float).reshape(spec.m)
    if not np.all(np.isfinite(target)):
        raise ValueError("non-finite projection target")
    if spec.kind == "box":
        return np.clip(target, spec.lo, spec.hi)
    if spec.kind == "ball":
        d = target - spec.center
        r = np.linalg.norm(d)
        if r <= spec.radius:
            return target.copy()
        return spec.center + d * (spec.radius / r)
    atoms = sample_atoms(spec, t, x, 1)
    dist = np.linalg.norm(atoms - target, axis=1)
    best = dist.min()
    cand = atoms[dist <= best + 1e-15 * max(1.0, best)]
    order = np.lexsort(cand.T[::-1])
    return cand[order[0]].copy()


def set_distance(spec: ControlSetSpec, t: float, x, u) -> float:
    u = np.asarray(u, dtype=float).reshape(spec.m)
    return float(np.linalg.norm(u - nearest_point(spec, t, x, u)))


def hausdorff(set_a, set_b) -> float:
    """Hausdorff distance between two finite point sets.

    >>> hausdorff([[-1.0], [1.0]], [[-1.0], [2.0]])
    1.0
    """
    A = np.asarray(set_a, dtype=float)
    B = np.asarray(set_b, dtype=float)
    if A.size == 0 or B.size == 0:
        raise ValueError("hausdorff distance needs nonempty sets")
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=-1)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Piecewise-constant signal: ``values[k]`` on ``[t_k, t_{k+1})``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.K:
            raise ValueError(f"expected {self.grid.K} values, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            bad = int(np.argwhere(~np.all(np.isfinite(v), axis=1))[0, 0])
            raise ValueError(f"non-finite control value on interval {bad}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: Grid, value) -> "ControlSignal":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(grid, np.tile(value, (grid.K, 1)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ControlSignal":
        """Sample ``fn`` at the left endpoint of every interval."""
        return cls(grid, np.array([np.atleast_1d(fn(t)) for t in grid.times[:-1]]))

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def resample(self, grid: Grid) -> "ControlSignal":
        """Restrict to a refinement ``grid`` of this signal's grid."""
        mids = 0.5 * (grid.times[:-1] + grid.times[1:])
        return ControlSignal(grid, self.values[self.grid.interval_index(mids)])

    def __sub__(self, other: "ControlSignal") -> "ControlSignal":
        from .grid import merge_times

        g = self.grid if self.grid == other.grid else merge_times(self.grid, other.grid)
        return ControlSignal(g, self.resample(g).values - other.resample(g).values)

    def l1_norm(self) -> float:
        return float(np.sum(np.linalg.norm(self.values, axis=1) * self.grid.steps))


def weak_norm(u, grid: Grid | None = None) -> float:
    """``sup_{s <= t} | int_s^t u |``, exact for piecewise-constant signals.

    The partial integrals are piecewise linear in ``t``, so the supremum is
    attained at breakpoints; for ``m > 1`` it is the diameter of the set of
    cumulative integrals at the breakpoints.
    """
    if isinstance(u, ControlSignal):
        grid, vals = u.grid, u.values
    else:
        vals = np.asarray(u, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
    cum = np.vstack([np.zeros((1, vals.shape[1])),
                     np.cumsum(vals * grid.steps[:, None], axis=0)])
    if cum.shape[1] == 1:
        return float(cum.max() - cum.min())
    best = 0.0
    block = 1024
    for i in range(0, len(cum), block):
        d = np.linalg.norm(cum[i:i + block, None, :] - cum[None, :, :], axis=-1)
        best = max(best, float(d.max()))
    return best


def lipschitz_probe(spec: ControlSetSpec, t: float, pairs, n: int = 9) -> float:
    """Largest ratio ``h(U(t,x), U(t,y)) / |x - y|`` over the given state pairs."""
    worst = 0.0
    for x, y in pairs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        gap = np.linalg.norm(x - y)
        if gap == 0:
            raise ValueError("lipschitz_probe needs distinct states")
        h = hausdorff(sample_atoms(spec, t, x, n), sample_atoms(spec, t, y, n))
        worst = max(worst, h / gap)
    return worst


def write_signal_csv(u: ControlSignal, path) -> None:
    """Columns ``t, u_1..u_m``; one row per breakpoint, the last row repeating the final value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"u_{j + 1}" for j in range(u.m)])
        vals = np.vstack([u.values, u.values[-1:]])
        for t, v in zip(u.grid.times, vals):
            w.writerow([repr(float(t))] + [repr(float(c)) for c in v])


def read_signal_csv(path) -> ControlSignal:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "t" or len(header) < 2 or len(body) < 2:
        raise ValueError(f"{path}: not a control signal CSV")
    data = np.array([[float(v) for v in r] for r in body])
    return ControlSignal(Grid.from_times(data[:, 0]), data[:-1, 1:])
