"""Built-in scenarios.

P1  classic chattering: ``x' = -u``, ``U = {-1, 1}``, ``L = x^2 + (1 - u^2)^2``.
    Relaxed optimum 0 with ``lambda = (delta_-1 + delta_1) / 2``; the
    original infimum 0 is not attained.
P2  unilateral: normal cone to ``[0, inf)``, ``U = [-1, 1]``,
    ``L = (x - 1)^2 + 0.1 u^2``, ``x0 = 1``, ``b = 2``.
P3  state-dependent constraint: ``U(t, x) = {-1, 1} + 0.5 tanh(x)``, ``k = 0.5``.
P4  linear monotone operator in the plane, ``U`` the unit disc,
    ``L = |x|^2 + (1 - |u|^2)^2``, ``x0 = 0``.  Relaxed optimum 0 by
    averaging boundary points of the disc.

Declared constants are chosen so every hypothesis holds: the cost bound
radius covers ``max(c_hat, M)`` and the Lipschitz constants are the
suprema of the gradients on that ball.
"""

from __future__ import annotations

import copy

__all__ = ["BUILTINS", "builtin_scenario"]

_SOLVER = {"max_iter": 5000, "fd_step": 1e-6, "tol": 1e-10, "window": 20}

BUILTINS = {
    "P1": {
        "problem": {
            "name": "P1",
            "N": 1, "m": 1, "horizon": 1.0, "x0": [0.0],
            "operator": {"kind": "zero"},
            "field": {"kind": "constant", "B": [[1.0]], "bound": 1.0, "lipschitz": 0.0},
            "controls": {"kind": "finite_atoms", "atoms": [[-1.0], [1.0]],
                         "a0": 1.0, "k": 0.0},
            # |x|, |u| <= 3: x^2 + (1 - u^2)^2 <= 9 + 64; gradient sup 4*3*8 = 96
            "cost": {"kind": "quadratic", "Q": [[1.0]], "x_ref": [0.0],
                     "penalty": "double_well", "penalty_weight": 1.0,
                     "bound_radius": 3.0, "bound": 73.0, "lipschitz": 96.0},
        },
        "numerics": {"K": 50, "atoms": 2, "chatter": [1, 2, 5, 10, 20], "sim_K": 2000,
                     "seed": 0, "solver": dict(_SOLVER)},
        "output": {"dir": "out/P1"},
        "signal": {"kind": "constant", "value": [1.0]},
    },
    "P2": {
        "problem": {
            "name": "P2",
            "N": 1, "m": 1, "horizon": 2.0, "x0": [1.0],
            "operator": {"kind": "normal_cone_box", "lo": [0.0], "hi": [None]},
            "field": {"kind": "constant", "B": [[1.0]], "bound": 1.0, "lipschitz": 0.0},
            "controls": {"kind": "box", "lo": [-1.0], "hi": [1.0], "a0": 1.0, "k": 0.0},
            # c_hat = 3 e^2 < 23: (23 + 1)^2 + 0.1 * 23^2 = 628.9
            "cost": {"kind": "quadratic", "Q": [[1.0]], "x_ref": [1.0],
                     "penalty": "square", "penalty_weight": 0.1,
                     "bound_radius": 23.0, "bound": 630.0, "lipschitz": 48.0},
        },
        "numerics": {"K": 50, "atoms": 3, "chatter": [1, 2, 5, 10], "sim_K": 2000,
                     "seed": 0, "solver": dict(_SOLVER)},
        "output": {"dir": "out/P2"},
        "signal": {"kind": "constant", "value": [1.0]},
    },
    "P3": {
        "problem": {
            "name": "P3",
            "N": 1, "m": 1, "horizon": 1.0, "x0": [0.0],
            "operator": {"kind": "zero"},
            "field": {"kind": "constant", "B": [[1.0]], "bound": 1.0, "lipschitz": 0.0},
            "controls": {"kind": "finite_atoms", "atoms": [[-1.0], [1.0]],
                         "kappa": 0.5, "saturation": "tanh", "a0": 1.5, "k": 0.5},
            # c_hat = 1.5 e^1.5 < 7: 49 + 48^2 = 2353; gradient sup 4*7*48 = 1344
            "cost": {"kind": "quadratic", "Q": [[1.0]], "x_ref": [0.0],
                     "penalty": "double_well", "penalty_weight": 1.0,
                     "bound_radius": 7.0, "bound": 2353.0, "lipschitz": 1344.0},
        },
        "numerics": {"K": 50, "atoms": 2, "chatter": [5, 10, 20], "sim_K": 2000,
                     "seed": 0, "solver": dict(_SOLVER)},
        "output": {"dir": "out/P3"},
        "signal": {"kind": "feedback", "value": [1.0]},
    },
    "P4": {
        "problem": {
            "name": "P4",
            "N": 2, "m": 2, "horizon": 1.0, "x0": [0.0, 0.0],
            "operator": {"kind": "linear", "P": [[0.5, 1.0], [-1.0, 0.5]]},
            "field": {"kind": "constant", "B": [[1.0, 0.0], [0.0, 1.0]],
                      "bound": 1.0, "lipschitz": 0.0},
            "controls": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0,
                         "a0": 1.0, "k": 0.0},
            # c_hat = e < 6: 36 + 35^2 = 1261; gradient sup 4*6*35 = 840
            "cost": {"kind": "quadratic", "Q": [[1.0, 0.0], [0.0, 1.0]], "x_ref": [0.0, 0.0],
                     "penalty": "double_well", "penalty_weight": 1.0,
                     "bound_radius": 6.0, "bound": 1261.0, "lipschitz": 840.0},
        },
        "numerics": {"K": 20, "atoms": 7, "chatter": [1, 2, 5, 10], "sim_K": 1000,
                     "seed": 0, "solver": dict(_SOLVER)},
        "output": {"dir": "out/P4"},
        "signal": {"kind": "constant", "value": [0.0, 0.0]},
    },
}


def builtin_scenario(name: str) -> dict:
    """Deep copy of a built-in scenario dictionary."""
    try:
        return copy.deepcopy(BUILTINS[name])
    except KeyError:
        raise KeyError(f"unknown built-in scenario {name!r}; choose from {sorted(BUILTINS)}") from None
