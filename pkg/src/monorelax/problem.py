"""The optimal control problem data tuple."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .controls import ControlSetSpec
from .dynamics import FieldSpec, apriori_bound
from .grid import Grid
from .monotone import MonotoneOperator
from .relax_convex import CostSpec

__all__ = ["Problem"]


@dataclass(frozen=True, eq=False)
class Problem:
    """Minimize ``int_0^b L(t, x, u) dt`` subject to
    ``-x' in A(x) + f(t, x) u``, ``x(0) = x0``, ``u(t) in U(t, x(t))``.

    ``K`` and ``n_atoms`` are the default discretization: the number of
    base intervals and the size of the finite net standing in for
    ``U(t, x)``.
    """

    operator: MonotoneOperator
    field: FieldSpec
    controls: ControlSetSpec
    cost: CostSpec
    x0: np.ndarray
    horizon: float
    K: int = 50
    n_atoms: int = 3
    name: str = "problem"

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        object.__setattr__(self, "x0", x0)
        N = self.operator.dim
        if len(x0) != N or self.field.N != N:
            raise ValueError("state dimensions of x0, A and f disagree")
        if self.field.m != self.controls.m:
            raise ValueError("control dimensions of f and U disagree")

    @property
    def N(self) -> int:
        return self.operator.dim

    @property
    def m(self) -> int:
        return self.controls.m

    @cached_property
    def c_hat(self) -> float:
        """A-priori bound on every admissible trajectory (computed once)."""
        return apriori_bound(self)

    @property
    def grid(self) -> Grid:
        return Grid(self.horizon, self.K)

    def with_grid(self, K: int | None = None, n_atoms: int | None = None) -> "Problem":
        from dataclasses import replace

        return replace(self, K=K or self.K, n_atoms=n_atoms or self.n_atoms)
