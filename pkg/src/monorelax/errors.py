"""Exception types.  Each carries the offending location so callers can report it."""

from __future__ import annotations


class MonorelaxError(Exception):
    pass


class HypothesisError(MonorelaxError):
    """A declared structural hypothesis does not hold; ``witness`` describes where."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class NonFiniteForcingError(MonorelaxError, ValueError):
    def __init__(self, index):
        super().__init__(f"non-finite forcing on interval {index}")
        self.index = index


class ControlBoundError(HypothesisError, ValueError):
    def __init__(self, index, norm, bound):
        super().__init__(
            f"control norm {norm:.6g} exceeds bound M={bound:.6g} on interval {index}",
            {"index": index, "norm": norm, "bound": bound})
        self.index = index


class CapViolation(HypothesisError):
    """``L(t, x, u)`` exceeds the cap ``a_c(t)`` used to define the epigraph strip."""


class VnViolation(HypothesisError):
    def __init__(self, index, slack):
        super().__init__(
            f"feedback selection leaves the V_n band at step {index} (excess {slack:.3e})",
            {"index": index, "excess": slack})
        self.index = index


class InadmissiblePair(MonorelaxError, ValueError):
    def __init__(self, report):
        super().__init__(f"state-control pair is not admissible: {report.reason}")
        self.report = report


class SupportViolation(MonorelaxError, ValueError):
    def __init__(self, k, i, distance):
        super().__init__(
            f"atom {i} on interval {k} lies {distance:.3e} away from U(t_k, x_k)")
        self.k = k
        self.i = i
