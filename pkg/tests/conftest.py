from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from monorelax import (
    ControlSetSpec,
    CostSpec,
    FieldSpec,
    MonotoneOperator,
    Problem,
    StepProfile,
    builtin_problem,
)
from monorelax.optimizer import solve_relaxed

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def const(v, b=1.0):
    return StepProfile.constant(v, b)


def make_problem(op=None, B=((1.0,),), controls=None, cost=None, x0=(0.0,), b=1.0, K=50,
                 n_atoms=3, field_bound=None):
    """Small problem factory with honest declared constants."""
    B = np.asarray(B, dtype=float)
    N, m = B.shape
    op = op or MonotoneOperator.zero(N)
    bound = field_bound if field_bound is not None else max(float(np.linalg.norm(B, 2)), 0.0)
    fld = FieldSpec("constant", B, const(bound, b), const(0.0, b))
    controls = controls or ControlSetSpec("box", m, const(1.0 * np.sqrt(m), b), const(0.0, b),
                                          lo=-np.ones(m), hi=np.ones(m))
    cost = cost or CostSpec("quadratic", 10.0, const(1e6, b), const(1e6, b), Q=np.eye(N))
    return Problem(op, fld, controls, cost, np.asarray(x0, dtype=float), b, K=K, n_atoms=n_atoms)


@pytest.fixture(scope="session")
def p1():
    return builtin_problem("P1")


@pytest.fixture(scope="session")
def p3():
    return builtin_problem("P3")


@pytest.fixture(scope="session")
def p1_relaxed(p1):
    return solve_relaxed(p1, mode="young")


@pytest.fixture(scope="session")
def p3_relaxed(p3):
    return solve_relaxed(p3, mode="young")


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
