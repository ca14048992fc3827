"""Relaxation of optimal control problems for evolution inclusions driven by maximal monotone operators."""

from __future__ import annotations

from .chattering import chatter_realize, convergence_table, feedback_correct
from .controls import (
    ControlSetSpec,
    ControlSignal,
    hausdorff,
    lipschitz_probe,
    nearest_point,
    sample_atoms,
    weak_norm,
)
from .dynamics import (
    FieldSpec,
    Trajectory,
    apriori_bound,
    continuity_probe,
    solve_controlled,
    solve_forced,
    solve_young,
)
from .errors import HypothesisError, MonorelaxError
from .grid import Grid, StepProfile
from .library import BUILTINS, builtin_scenario
from .monotone import MonotoneOperator, domain_project, graph_pairs, resolvent
from .optimizer import SolverOptions, estimate_original, solve_relaxed
from .problem import Problem
from .relax_convex import CostSpec, biconjugate, check_admissible, cost_J, cost_Jr, gamma_sample
from .relax_young import (
    DiscreteMeasure,
    YoungControl,
    barycenter,
    cost_Jhat,
    dirac_embed,
    narrow_functional,
    young_support_check,
)
from .scenario import ScenarioError, validate

__version__ = "0.1.0"


def builtin_problem(name: str, **overrides) -> Problem:
    """Built-in problem ``"P1"`` .. ``"P4"`` (``K``/``n_atoms`` may be overridden)."""
    from .scenario import parse_scenario

    p = parse_scenario(builtin_scenario(name)).problem
    return p.with_grid(**overrides) if overrides else p
