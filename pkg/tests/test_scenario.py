from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from monorelax.errors import HypothesisError
from monorelax.library import BUILTINS, builtin_scenario
from monorelax.scenario import ScenarioError, load_scenario, parse_scenario, validate

ROOT = Path(__file__).resolve().parents[1]


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_satisfy_hypotheses(name):
    problem, report = validate(builtin_scenario(name))
    assert report.ok, report.lines()
    assert problem.name == name
    assert [c.name for c in report.checks] == ["H(A)", "H_0", "H(f)(ii)", "H(f)(iii)", "H(U)(i)",
                                               "H(U)(ii)", "H(L)(ii)", "H(L)(iii)"]


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_scenario_files_match_library(name):
    assert load_scenario(ROOT / "scenarios" / f"{name}.json") == builtin_scenario(name)


def test_builtin_copies_are_independent():
    a = builtin_scenario("P1")
    a["problem"]["x0"][0] = 5.0
    assert BUILTINS["P1"]["problem"]["x0"] == [0.0]
    with pytest.raises(KeyError, match="P1"):
        builtin_scenario("P9")


def test_parse_overrides():
    sc = parse_scenario(builtin_scenario("P1"), grid=17, atoms=5)
    assert sc.problem.K == 17 and sc.problem.n_atoms == 5
    assert sc.numerics.chatter == (1, 2, 5, 10, 20)
    assert sc.output_dir == "out/P1"


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d["problem"]["cost"].__setitem__("bound", "big"), "/problem/cost/bound"),
    (lambda d: d["problem"].pop("x0"), "/problem"),
    (lambda d: d["numerics"].__setitem__("K", 0), "/numerics/K"),
    (lambda d: d["problem"].__setitem__("x0", [0.0, 1.0]), "/problem/x0"),
    (lambda d: d["problem"]["field"].__setitem__("B", [[1.0, 2.0]]), "/problem/field/B"),
])
def test_schema_errors_carry_paths(mutate, path):
    d = builtin_scenario("P1")
    mutate(d)
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(d)
    assert exc.value.path == path


def test_profile_breaks_must_end_at_horizon():
    d = builtin_scenario("P1")
    d["problem"]["controls"]["a0"] = {"breaks": [0.0, 0.5, 0.9], "values": [1.0, 1.0]}
    with pytest.raises(ScenarioError, match="horizon"):
        parse_scenario(d)
    d["problem"]["controls"]["a0"] = {"breaks": [0.0, 0.5, 1.0], "values": [1.0, 2.0]}
    assert parse_scenario(d).problem.controls.a0(0.75) == 2.0


def test_invalid_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError, match="invalid JSON"):
        validate(bad)
    with pytest.raises(OSError):
        validate(tmp_path / "missing.json")


def test_non_monotone_operator_rejected():
    d = builtin_scenario("P4")
    d["problem"]["operator"]["P"] = [[-1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(HypothesisError, match="H\\(A\\)"):
        parse_scenario(d)


def test_initial_state_outside_domain():
    d = builtin_scenario("P2")
    d["problem"]["x0"] = [-1.0]
    _, report = validate(d)
    check = report["H_0"]
    assert not check.ok and check.worst == pytest.approx(1.0)
    assert [c.name for c in report.failures] == ["H_0"]


def test_understated_control_lipschitz_constant():
    d = builtin_scenario("P3")
    d["problem"]["controls"]["k"] = 0.0
    _, report = validate(d)
    check = report["H(U)(ii)"]
    assert not check.ok and check.worst > 0.1
    assert "FAIL" in check.line()


def test_understated_cost_lipschitz_constant():
    d = builtin_scenario("P1")
    d["problem"]["cost"]["lipschitz"] = 1.0
    _, report = validate(d)
    check = report["H(L)(iii)"]
    assert not check.ok and 50 < check.worst < 96
    assert not report.ok


def test_bound_radius_must_cover_state_bound():
    d = builtin_scenario("P2")
    d["problem"]["cost"]["bound_radius"] = 2.0
    _, report = validate(d)
    assert not report["H(L)(ii)"].ok


def test_validation_is_seeded():
    d = builtin_scenario("P3")
    d["problem"]["controls"]["k"] = 0.0
    a = validate(d, seed=4)[1].lines()
    b = validate(d, seed=4)[1].lines()
    assert a == b


def test_signal_block():
    sc = parse_scenario(builtin_scenario("P3"))
    assert sc.signal == {"kind": "feedback", "value": [1.0]}
    d = builtin_scenario("P4")
    d["signal"]["value"] = [1.0]
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(d)
    assert exc.value.path == "/signal/value"


def test_null_upper_bound_means_unbounded():
    op = parse_scenario(builtin_scenario("P2")).problem.operator
    assert op.hi[0] == np.inf and op.lo[0] == 0.0
    assert json.loads(json.dumps(builtin_scenario("P2")))["problem"]["operator"]["hi"] == [None]
