"""Scenario files: schema, parsing into a :class:`Problem`, and hypothesis probes.

A scenario is a JSON document with three blocks::

    {
      "problem":  {"N", "m", "horizon", "x0", "operator", "field",
                   "controls", "cost", "name"?},
      "numerics": {"K", "atoms", "chatter", "sim_K"?, "seed"?, "solver"?},
      "output":   {"dir"?},
      "signal":   {...}?          # control simulated by the ``solve`` command
    }

Every hypothesis constant is declared explicitly as a *profile*: either a
nonnegative number (constant on ``[0, b]``) or ``{"breaks": [0, ..., b],
"values": [...]}`` describing a right-continuous step function.  Infinite
box bounds are written as ``null``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .controls import ControlSetSpec, hausdorff, sample_atoms
from .dynamics import FieldSpec, apriori_bound
from .errors import HypothesisError, MonorelaxError
from .grid import StepProfile
from .monotone import MonotoneOperator, domain_distance, graph_pairs
from .optimizer import SolverOptions
from .problem import Problem
from .relax_convex import CostSpec

__all__ = [
    "SCHEMA",
    "ScenarioError",
    "Numerics",
    "Scenario",
    "HypothesisCheck",
    "HypothesisReport",
    "load_scenario",
    "parse_scenario",
    "check_hypotheses",
    "validate",
]

H0_TOL = 1e-9
PROBE_RTOL = 1e-9

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_bound_list = {"type": "array", "items": {"type": ["number", "null"]}, "minItems": 1}
_matrix = {"type": "array", "items": _number_list, "minItems": 1}
_profile = {
    "oneOf": [
        {"type": "number", "minimum": 0},
        {
            "type": "object",
            "required": ["breaks", "values"],
            "additionalProperties": False,
            "properties": {
                "breaks": {"type": "array", "items": {"type": "number"}, "minItems": 2},
                "values": {"type": "array", "items": {"type": "number", "minimum": 0},
                           "minItems": 1},
            },
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["problem", "numerics"],
    "additionalProperties": False,
    "properties": {
        "problem": {
            "type": "object",
            "required": ["N", "m", "horizon", "x0", "operator", "field", "controls", "cost"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "N": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "x0": _number_list,
                "operator": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["zero", "normal_cone_box", "linear", "subdiff_abs"]},
                        "lo": _bound_list,
                        "hi": _bound_list,
                        "P": _matrix,
                        "weights": _number_list,
                    },
                },
                "field": {
                    "type": "object",
                    "required": ["kind", "B", "bound", "lipschitz"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["constant", "state_affine", "time_weighted"]},
                        "B": _matrix,
                        "bound": _profile,
                        "lipschitz": _profile,
                        "gain": {"type": "number"},
                        "radius": {"type": "number", "exclusiveMinimum": 0},
                        "weight": _profile,
                    },
                },
                "controls": {
                    "type": "object",
                    "required": ["kind", "a0", "k"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["finite_atoms", "box", "ball"]},
                        "a0": _profile,
                        "k": _profile,
                        "atoms": _matrix,
                        "kappa": {"oneOf": [{"type": "number"}, _matrix]},
                        "saturation": {"enum": ["none", "tanh", "clip"]},
                        "lo": _number_list,
                        "hi": _number_list,
                        "center": _number_list,
                        "radius": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "cost": {
                    "type": "object",
                    "required": ["kind", "bound_radius", "bound", "lipschitz"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["quadratic", "polynomial"]},
                        "bound_radius": {"type": "number", "exclusiveMinimum": 0},
                        "bound": _profile,
                        "lipschitz": _profile,
                        "Q": _matrix,
                        "x_ref": _number_list,
                        "penalty": {"enum": ["zero", "square", "abs", "double_well"]},
                        "penalty_weight": {"type": "number"},
                        "terms": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "prefixItems": [
                                    {"type": "number"},
                                    {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                    {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                ],
                                "minItems": 3,
                                "maxItems": 3,
                            },
                        },
                    },
                },
            },
        },
        "numerics": {
            "type": "object",
            "required": ["K", "atoms"],
            "additionalProperties": False,
            "properties": {
                "K": {"type": "integer", "minimum": 1},
                "atoms": {"type": "integer", "minimum": 1},
                "chatter": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "sim_K": {"type": ["integer", "null"], "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "solver": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "max_iter": {"type": "integer", "minimum": 1},
                        "fd_step": {"type": "number", "exclusiveMinimum": 0},
                        "tol": {"type": "number", "minimum": 0},
                        "window": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
        "signal": {
            "type": "object",
            "required": ["kind", "value"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["constant", "feedback"]},
                "value": _number_list,
            },
        },
    },
}


class ScenarioError(MonorelaxError, ValueError):
    """Malformed scenario; ``path`` locates the offending entry."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Numerics:
    K: int
    atoms: int
    chatter: tuple = (1, 2, 5, 10)
    sim_K: int | None = None
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)


@dataclass(frozen=True, eq=False)
class Scenario:
    problem: Problem
    numerics: Numerics
    output_dir: str | None
    signal: dict | None
    raw: dict


def load_scenario(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(str(path), f"invalid JSON ({exc})") from exc


def _profile(spec, b, path) -> StepProfile:
    if isinstance(spec, (int, float)):
        return StepProfile.constant(float(spec), b)
    br = np.asarray(spec["breaks"], dtype=float)
    if abs(br[-1] - b) > 1e-12 * b:
        raise ScenarioError(path, f"profile must end at the horizon {b}, ends at {br[-1]}")
    br[-1] = b
    try:
        return StepProfile(br, spec["values"])
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from exc


def _bounds(vals, sign):
    return np.array([sign * np.inf if v is None else float(v) for v in vals])


def _operator(spec, N, path) -> MonotoneOperator:
    kind = spec["kind"]
    try:
        if kind == "zero":
            return MonotoneOperator.zero(N)
        if kind == "normal_cone_box":
            lo = _bounds(spec.get("lo", [None] * N), -1.0)
            hi = _bounds(spec.get("hi", [None] * N), 1.0)
            if len(lo) != N or len(hi) != N:
                raise ScenarioError(path, f"lo and hi need {N} entries")
            return MonotoneOperator("normal_cone_box", N, lo=lo, hi=hi)
        if kind == "linear":
            P = np.asarray(spec["P"], dtype=float)
            if P.shape != (N, N):
                raise ScenarioError(path + "/P", f"expected a {N}x{N} matrix")
            sym = 0.5 * (P + P.T)
            lam_min = float(np.linalg.eigvalsh(sym).min())
            if lam_min < -1e-10:
                raise HypothesisError(
                    f"H(A) failed: P is not monotone, min eigenvalue of (P+P^T)/2 = {lam_min:.6g}",
                    {"hypothesis": "H(A)", "min_eigenvalue": lam_min})
            return MonotoneOperator.linear(P)
        w = np.asarray(spec["weights"], dtype=float)
        if len(w) != N:
            raise ScenarioError(path + "/weights", f"expected {N} entries")
        return MonotoneOperator.subdiff_abs(w)
    except KeyError as exc:
        raise ScenarioError(path, f"missing {exc.args[0]!r} for kind {kind!r}") from None
    except ValueError as exc:
        if isinstance(exc, MonorelaxError):
            raise
        raise HypothesisError(f"H(A) failed: {exc}", {"hypothesis": "H(A)"}) from exc


def _field(spec, N, m, b, path) -> FieldSpec:
    B = np.asarray(spec["B"], dtype=float)
    if B.shape != (N, m):
        raise ScenarioError(path + "/B", f"expected an {N}x{m} matrix, got {B.shape}")
    kw = {}
    if "weight" in spec:
        kw["weight"] = _profile(spec["weight"], b, path + "/weight")
    try:
        return FieldSpec(spec["kind"], B, _profile(spec["bound"], b, path + "/bound"),
                         _profile(spec["lipschitz"], b, path + "/lipschitz"),
                         gain=float(spec.get("gain", 0.0)), radius=float(spec.get("radius", 1.0)),
                         **kw)
    except ValueError as exc:
        if isinstance(exc, MonorelaxError):
            raise
        raise ScenarioError(path, str(exc)) from exc


def _controls(spec, m, b, path) -> ControlSetSpec:
    kind = spec["kind"]
    kw = {"a0": _profile(spec["a0"], b, path + "/a0"), "k": _profile(spec["k"], b, path + "/k")}
    try:
        if kind == "finite_atoms":
            atoms = np.asarray(spec["atoms"], dtype=float)
            if atoms.ndim != 2 or atoms.shape[1] != m:
                raise ScenarioError(path + "/atoms", f"atoms must be rows of length {m}")
            kw.update(atoms=atoms, saturation=spec.get("saturation", "none"))
            if "kappa" in spec:
                kw["kappa"] = np.asarray(spec["kappa"], dtype=float)
        elif kind == "box":
            kw.update(lo=spec["lo"], hi=spec["hi"])
        else:
            kw.update(center=spec.get("center", [0.0] * m), radius=float(spec["radius"]))
        return ControlSetSpec(kind, m, **kw)
    except KeyError as exc:
        raise ScenarioError(path, f"missing {exc.args[0]!r} for kind {kind!r}") from None
    except ValueError as exc:
        if isinstance(exc, MonorelaxError):
            raise
        raise ScenarioError(path, str(exc)) from exc


def _cost(spec, N, m, b, path) -> CostSpec:
    kw = {
        "bound_radius": float(spec["bound_radius"]),
        "bound": _profile(spec["bound"], b, path + "/bound"),
        "lipschitz": _profile(spec["lipschitz"], b, path + "/lipschitz"),
    }
    try:
        if spec["kind"] == "quadratic":
            Q = np.asarray(spec.get("Q", np.eye(N)), dtype=float)
            if Q.shape != (N, N):
                raise ScenarioError(path + "/Q", f"expected a {N}x{N} matrix")
            kw.update(Q=Q, x_ref=spec.get("x_ref"), penalty=spec.get("penalty", "zero"),
                      penalty_weight=float(spec.get("penalty_weight", 1.0)))
        else:
            terms = spec.get("terms", [])
            for j, (_, xp, up) in enumerate(terms):
                if len(xp) != N or len(up) != m:
                    raise ScenarioError(f"{path}/terms/{j}", f"need {N} state and {m} control powers")
            kw["terms"] = terms
        return CostSpec(spec["kind"], **kw)
    except ValueError as exc:
        if isinstance(exc, MonorelaxError):
            raise
        raise ScenarioError(path, str(exc)) from exc


def parse_scenario(data: dict, grid: int | None = None, atoms: int | None = None) -> Scenario:
    """Schema-check ``data`` and build the problem; ``grid``/``atoms`` override the numerics."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ScenarioError(path, err.message)

    p = data["problem"]
    N, m, b = p["N"], p["m"], float(p["horizon"])
    if len(p["x0"]) != N:
        raise ScenarioError("/problem/x0", f"expected {N} entries")
    op = _operator(p["operator"], N, "/problem/operator")
    fld = _field(p["field"], N, m, b, "/problem/field")
    U = _controls(p["controls"], m, b, "/problem/controls")
    L = _cost(p["cost"], N, m, b, "/problem/cost")

    nm = data["numerics"]
    solver = SolverOptions(**nm.get("solver", {}))
    numerics = Numerics(
        K=int(grid or nm["K"]),
        atoms=int(atoms or nm["atoms"]),
        chatter=tuple(sorted(set(nm.get("chatter", [1, 2, 5, 10])))),
        sim_K=nm.get("sim_K"),
        seed=int(nm.get("seed", 0)),
        solver=solver,
    )
    problem = Problem(op, fld, U, L, np.asarray(p["x0"], dtype=float), b,
                      K=numerics.K, n_atoms=numerics.atoms, name=p.get("name", "scenario"))
    signal = data.get("signal")
    if signal is not None and len(signal["value"]) != m:
        raise ScenarioError("/signal/value", f"expected {m} entries")
    return Scenario(problem, numerics, data.get("output", {}).get("dir"), signal, data)


@dataclass
class HypothesisCheck:
    """Outcome of one probe; ``worst`` is the largest observed excess ratio."""

    name: str
    ok: bool
    worst: float
    witness: dict

    def line(self) -> str:
        status = "pass" if self.ok else "FAIL"
        wit = ", ".join(f"{k}={_fmt(v)}" for k, v in self.witness.items())
        return f"{self.name}: {status} (worst {self.worst:.6g}; {wit})"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


@dataclass
class HypothesisReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def __getitem__(self, name) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _ball(rng, n, dim, r):
    """Points in the closed ball of radius ``r``, half of them on the sphere."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = r * np.where(np.arange(n) % 2 == 0, 1.0, rng.random(n) ** (1.0 / dim))
    return g * rad[:, None]


def _probe_times(rng, profiles, b, n):
    pts = [rng.random(n) * b, [0.0, b]]
    for prof in profiles:
        br = prof.breaks
        pts.append(0.5 * (br[:-1] + br[1:]))
    return np.unique(np.concatenate([np.ravel(p) for p in pts]))


def _excess(observed, declared):
    """Relative amount by which ``observed`` exceeds ``declared``."""
    return (observed - declared) / max(1.0, abs(declared))


def check_hypotheses(problem: Problem, seed: int = 0, samples: int = 200) -> HypothesisReport:
    """Probe every declared hypothesis on random samples.

    Checks, in order: ``H(A)`` monotonicity of graph samples, ``H_0``
    (``x0`` in the closed domain), ``H(f)(ii)`` growth bound and
    ``H(f)(iii)`` Lipschitz profile, ``H(U)(i)`` uniform bound ``a0``,
    ``H(U)(ii)`` Hausdorff-Lipschitz profile ``k``, and ``H(L)(ii)``/
    ``H(L)(iii)`` bound and Lipschitz profiles of the cost on the declared
    radius, which must also cover ``max(c_hat, M)``.
    """
    rng = np.random.default_rng(seed)
    op, fld, U, L = problem.operator, problem.field, problem.controls, problem.cost
    N, m, b = problem.N, problem.m, problem.horizon
    n = problem.n_atoms
    checks = []

    # H(A): monotone graph
    xs = rng.standard_normal((samples, N)) * 3.0
    pairs = graph_pairs(op, xs)
    worst, wit = -np.inf, {}
    for i in range(0, samples - 1, 2):
        (x, xs_), (y, ys_) = pairs[i], pairs[i + 1]
        gap = float(np.dot(xs_ - ys_, x - y))
        if -gap > worst:
            worst, wit = -gap, {"x": x.tolist(), "y": y.tolist(), "inner": gap}
    checks.append(HypothesisCheck("H(A)", worst <= 1e-12, worst, wit))

    # H_0
    d = domain_distance(op, problem.x0)
    checks.append(HypothesisCheck("H_0", d <= H0_TOL, d,
                                  {"x0": problem.x0.tolist(), "distance": d}))

    c_hat = apriori_bound(problem)
    r_state = max(c_hat, 1.0)

    # H(f)(ii): ||f(t,x)|| <= a(t)(1 + |x|)
    ts = _probe_times(rng, [fld.bound, fld.lipschitz, U.a0, U.k, L.bound, L.lipschitz], b, 16)
    X = _ball(rng, samples, N, r_state)
    worst, wit = -np.inf, {}
    for t in ts:
        norms = np.linalg.norm(fld(t, X), ord=2, axis=(-2, -1))
        allowed = fld.bound(t) * (1.0 + np.linalg.norm(X, axis=1))
        ex = (norms - allowed) / np.maximum(1.0, allowed)
        i = int(np.argmax(ex))
        if ex[i] > worst:
            worst, wit = float(ex[i]), {"t": float(t), "x": X[i].tolist(),
                                        "norm": float(norms[i]), "allowed": float(allowed[i])}
    checks.append(HypothesisCheck("H(f)(ii)", worst <= PROBE_RTOL, worst, wit))

    # H(f)(iii): ||f(t,x) - f(t,y)|| <= l(t) |x - y| on the ball of radius c_hat
    Y = _ball(rng, samples, N, r_state)
    worst, wit = -np.inf, {}
    for t in ts:
        diff = np.linalg.norm(fld(t, X) - fld(t, Y), ord=2, axis=(-2, -1))
        gap = np.linalg.norm(X - Y, axis=1)
        ratio = diff / np.maximum(gap, 1e-300)
        ex = (ratio - fld.lipschitz(t)) / max(1.0, fld.lipschitz(t))
        i = int(np.argmax(ex))
        if ex[i] > worst:
            worst, wit = float(ex[i]), {"t": float(t), "x": X[i].tolist(), "y": Y[i].tolist(),
                                        "ratio": float(ratio[i]), "declared": fld.lipschitz(t)}
    checks.append(HypothesisCheck("H(f)(iii)", worst <= PROBE_RTOL, worst, wit))

    # H(U)(i): |u| <= a0(t) on U(t, x)
    worst, wit = -np.inf, {}
    for t in ts:
        for x in X[:32]:
            atoms = sample_atoms(U, t, x, n)
            nu = np.linalg.norm(atoms, axis=1)
            i = int(np.argmax(nu))
            ex = _excess(float(nu[i]), U.a0(t))
            if ex > worst:
                worst, wit = ex, {"t": float(t), "x": x.tolist(), "u": atoms[i].tolist(),
                                  "norm": float(nu[i]), "declared": U.a0(t)}
    checks.append(HypothesisCheck("H(U)(i)", worst <= PROBE_RTOL, worst, wit))

    # H(U)(ii): h(U(t,x), U(t,y)) <= k(t) |x - y|
    worst, wit = -np.inf, {}
    near = X[:48] + 0.1 * rng.standard_normal((48, N))
    for t in ts:
        for x, y in zip(np.vstack([X[:48], X[:48]]), np.vstack([Y[:48], near])):
            gap = float(np.linalg.norm(x - y))
            if gap == 0.0:
                continue
            ratio = hausdorff(sample_atoms(U, t, x, n), sample_atoms(U, t, y, n)) / gap
            ex = _excess(ratio, U.k(t))
            if ex > worst:
                worst, wit = ex, {"t": float(t), "x": x.tolist(), "y": y.tolist(),
                                  "ratio": ratio, "declared": U.k(t)}
    checks.append(HypothesisCheck("H(U)(ii)", worst <= PROBE_RTOL, worst, wit))

    # H(L)(ii), (iii) on |x|, |u| <= r
    r = L.bound_radius
    need = max(c_hat, U.M)
    Xr, Ur = _ball(rng, samples, N, r), _ball(rng, samples, m, r)
    Yr, Vr = _ball(rng, samples, N, r), _ball(rng, samples, m, r)
    # the declared radius must itself cover max(c_hat, M)
    worst, wit = _excess(need, r), {"radius": r, "required": need}
    for t in ts:
        vals = np.abs(L(t, Xr, Ur))
        ex = (vals - L.bound(t)) / max(1.0, L.bound(t))
        i = int(np.argmax(ex))
        if ex[i] > worst:
            worst, wit = float(ex[i]), {"t": float(t), "x": Xr[i].tolist(), "u": Ur[i].tolist(),
                                        "L": float(vals[i]), "declared": L.bound(t)}
    checks.append(HypothesisCheck("H(L)(ii)", worst <= PROBE_RTOL, worst, wit))

    worst, wit = -np.inf, {}
    # pairs both far apart and close together, so local slopes are seen
    Yr2 = np.vstack([Yr, Xr + 1e-3 * rng.standard_normal(Xr.shape)])
    Vr2 = np.vstack([Vr, Ur + 1e-3 * rng.standard_normal(Ur.shape)])
    Xr2, Ur2 = np.vstack([Xr, Xr]), np.vstack([Ur, Ur])
    inside = (np.linalg.norm(Yr2, axis=1) <= r) & (np.linalg.norm(Vr2, axis=1) <= r)
    Xr2, Ur2, Yr2, Vr2 = Xr2[inside], Ur2[inside], Yr2[inside], Vr2[inside]
    for t in ts:
        diff = np.abs(L(t, Xr2, Ur2) - L(t, Yr2, Vr2))
        gap = np.linalg.norm(Xr2 - Yr2, axis=1) + np.linalg.norm(Ur2 - Vr2, axis=1)
        ratio = diff / np.maximum(gap, 1e-300)
        ex = (ratio - L.lipschitz(t)) / max(1.0, L.lipschitz(t))
        i = int(np.argmax(ex))
        if ex[i] > worst:
            worst, wit = float(ex[i]), {"t": float(t), "x": Xr2[i].tolist(), "u": Ur2[i].tolist(),
                                        "y": Yr2[i].tolist(), "v": Vr2[i].tolist(),
                                        "ratio": float(ratio[i]), "declared": L.lipschitz(t)}
    checks.append(HypothesisCheck("H(L)(iii)", worst <= PROBE_RTOL, worst, wit))
    return HypothesisReport(checks)


def validate(scenario, seed: int | None = None, grid: int | None = None,
             atoms: int | None = None) -> tuple[Problem, HypothesisReport]:
    """Parse a scenario (dict or path) and probe its hypotheses.

    Raises
    ------
    ScenarioError
        On schema or shape errors, with the JSON path of the offending entry.
    HypothesisError
        When the operator itself is not monotone (no problem can be built).
    """
    data = scenario if isinstance(scenario, dict) else load_scenario(scenario)
    sc = parse_scenario(data, grid=grid, atoms=atoms)
    s = sc.numerics.seed if seed is None else seed
    return sc.problem, check_hypotheses(sc.problem, seed=s)
