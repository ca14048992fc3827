"""Maximal monotone operators with closed-form resolvents.

Four families are supported, each with an exact resolvent
``J_lam = (I + lam A)^{-1}``:

``zero``
    ``A = 0``; the resolvent is the identity.
``normal_cone_box``
    Normal cone to the box ``[lo, hi]`` (bounds may be infinite); the
    resolvent is the projection onto the box and does not depend on ``lam``.
``linear``
    ``A x = P x`` with ``P + P^T`` positive semidefinite.
``subdiff_abs``
    Subdifferential of ``x -> sum_i w_i |x_i|``; the resolvent is
    soft-thresholding.

All functions accept batched points of shape ``(..., N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MonotoneOperator",
    "resolvent",
    "domain_project",
    "graph_pairs",
    "min_norm_element",
    "distance_to_image",
    "domain_distance",
]

KINDS = ("zero", "normal_cone_box", "linear", "subdiff_abs")
PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MonotoneOperator:
    kind: str
    dim: int
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    P: np.ndarray | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.kind == "normal_cone_box":
            lo = np.asarray(self.lo, dtype=float).reshape(self.dim)
            hi = np.asarray(self.hi, dtype=float).reshape(self.dim)
            if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
                raise ValueError("box bounds must not be NaN")
            if np.any(lo > hi):
                raise ValueError("box requires lo <= hi componentwise")
            if np.any(lo > 0) or np.any(hi < 0):
                raise ValueError("0 must lie in the box so that 0 in A(0)")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "linear":
            P = np.asarray(self.P, dtype=float).reshape(self.dim, self.dim)
            sym = 0.5 * (P + P.T)
            lam_min = float(np.linalg.eigvalsh(sym).min())
            if lam_min < -PSD_TOL:
                raise ValueError(
                    f"P is not monotone: min eigenvalue of (P+P^T)/2 is {lam_min:.3e}")
            object.__setattr__(self, "P", P)
        elif self.kind == "subdiff_abs":
            w = np.asarray(self.weights, dtype=float).reshape(self.dim)
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("weights must be finite and nonnegative")
            object.__setattr__(self, "weights", w)

    # convenience constructors
    @classmethod
    def zero(cls, dim: int) -> "MonotoneOperator":
        return cls("zero", dim)

    @classmethod
    def normal_cone_box(cls, lo, hi) -> "MonotoneOperator":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        return cls("normal_cone_box", len(lo), lo=lo, hi=hi)

    @classmethod
    def linear(cls, P) -> "MonotoneOperator":
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return cls("linear", P.shape[0], P=P)

    @classmethod
    def subdiff_abs(cls, weights) -> "MonotoneOperator":
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        return cls("subdiff_abs", len(w), weights=w)

    @property
    def full_domain(self) -> bool:
        if self.kind != "normal_cone_box":
            return True
        return bool(np.all(np.isinf(self.lo)) and np.all(np.isinf(self.hi)))


@lru_cache(maxsize=64)
def _linear_inverse(P_bytes: bytes, dim: int, lam: float) -> np.ndarray:
    P = np.frombuffer(P_bytes).reshape(dim, dim)
    M = np.eye(dim) + lam * P
    # (I + lam P) is invertible for monotone P; a failure here is an internal error.
    return np.linalg.inv(M)


def _check_finite(z, what="input"):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"non-finite {what}")
    return z


def resolvent(op: MonotoneOperator, lam: float, z) -> np.ndarray:
    """Return ``x`` with ``z in x + lam A(x)``.

    Parameters
    ----------
    op : MonotoneOperator
    lam : float
        Positive step.
    z : array_like, shape (..., N)

    Examples
    --------
    >>> resolvent(MonotoneOperator.linear([[1.0]]), 1.0, [2.0])
    array([1.])
    """
    if not lam > 0:
        raise ValueError(f"resolvent step must be positive, got {lam}")
    z = _check_finite(z)
    if op.kind == "zero":
        return z.copy()
    if op.kind == "normal_cone_box":
        return np.clip(z, op.lo, op.hi)
    if op.kind == "linear":
        inv = _linear_inverse(op.P.tobytes(), op.dim, float(lam))
        return z @ inv.T
    # subdiff_abs
    return np.sign(z) * np.maximum(np.abs(z) - lam * op.weights, 0.0)


def domain_project(op: MonotoneOperator, z) -> np.ndarray:
    """Nearest point of the closure of ``D(A)``."""
    z = np.asarray(z, dtype=float)
    if op.kind == "normal_cone_box":
        return np.clip(z, op.lo, op.hi)
    return z.copy()


def domain_distance(op: MonotoneOperator, z) -> float:
    z = np.asarray(z, dtype=float)
    return float(np.linalg.norm(z - domain_project(op, z)))


def min_norm_element(op: MonotoneOperator, x) -> np.ndarray:
    """Minimal-norm element of ``A(x)`` for ``x`` in the closed domain."""
    x = np.asarray(x, dtype=float)
    if op.kind == "linear":
        return x @ op.P.T
    if op.kind == "subdiff_abs":
        return op.weights * np.sign(x)
    # zero, and normal cones always contain 0 on the closed domain
    return np.zeros_like(x)


def graph_pairs(op: MonotoneOperator, samples) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs ``(x, x*)`` in ``Gr A`` for each sample projected onto ``cl D(A)``."""
    out = []
    for s in samples:
        x = domain_project(op, np.atleast_1d(np.asarray(s, dtype=float)))
        out.append((x, min_norm_element(op, x)))
    return out


def distance_to_image(op: MonotoneOperator, x, w) -> float:
    """Euclidean distance from ``w`` to the set ``A(x)``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if op.kind == "zero":
        return float(np.linalg.norm(w))
    if op.kind == "linear":
        return float(np.linalg.norm(w - op.P @ x))
    if op.kind == "subdiff_abs":
        at_zero = x == 0.0
        r = np.where(at_zero,
                     np.maximum(np.abs(w) - op.weights, 0.0),
                     w - op.weights * np.sign(x))
        return float(np.linalg.norm(r))
    # normal cone to the box: componentwise cone at x
    lo_act = x <= op.lo
    hi_act = x >= op.hi
    r = np.where(lo_act & hi_act, 0.0,
                 np.where(lo_act, np.maximum(w, 0.0),
                          np.where(hi_act, np.minimum(w, 0.0), w)))
    return float(np.linalg.norm(r))
