from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from monorelax.cli import EXIT_HYPOTHESIS, EXIT_IO, EXIT_NONCONVERGED, EXIT_OK, main
from monorelax.controls import read_signal_csv
from monorelax.dynamics import read_trajectory_csv
from monorelax.library import builtin_scenario


def write_scenario(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_validate_builtins(tmp_path, capsys):
    for name in ("P1", "P2", "P3", "P4"):
        assert main(["validate", "--builtin", name, "--out", str(tmp_path / name)]) == EXIT_OK
        assert (tmp_path / name / "hypotheses.txt").read_text().count("pass") == 8


def test_missing_and_malformed_inputs(tmp_path, capsys):
    assert main(["validate", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == EXIT_IO
    d = builtin_scenario("P1")
    d["problem"]["cost"]["bound"] = "big"
    assert main(["validate", "--scenario", write_scenario(tmp_path, d), "--out", str(tmp_path)]) == EXIT_IO
    assert "/problem/cost/bound" in capsys.readouterr().err


@pytest.mark.parametrize("name, mutate, check", [
    ("P2", lambda d: d["problem"].__setitem__("x0", [-1.0]), "H_0"),
    ("P3", lambda d: d["problem"]["controls"].__setitem__("k", 0.0), "H(U)(ii)"),
    ("P1", lambda d: d["problem"]["cost"].__setitem__("lipschitz", 1.0), "H(L)(iii)"),
    ("P4", lambda d: d["problem"]["operator"].__setitem__("P", [[-1.0, 0.0], [0.0, 1.0]]), "H(A)"),
])
def test_broken_hypotheses_exit_2(tmp_path, capsys, name, mutate, check):
    d = builtin_scenario(name)
    mutate(d)
    for cmd in ("validate", "relax"):
        code = main([cmd, "--scenario", write_scenario(tmp_path, d), "--out", str(tmp_path)])
        assert code == EXIT_HYPOTHESIS
        assert check in capsys.readouterr().err
    assert not (tmp_path / "relaxed_trajectory.csv").exists()


def test_non_convergence_exit_3(tmp_path, capsys):
    d = builtin_scenario("P4")
    d["numerics"]["solver"]["max_iter"] = 1
    code = main(["relax", "--scenario", write_scenario(tmp_path, d), "--grid", "10",
                 "--out", str(tmp_path)])
    assert code == EXIT_NONCONVERGED
    assert "converged = False" in (tmp_path / "relax_summary.txt").read_text()


def test_relax_is_deterministic(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["relax", "--builtin", "P3", "--grid", "20", "--out", str(out)]) == EXIT_OK
        outs.append({f.name: f.read_bytes() for f in out.iterdir()})
    assert outs[0] == outs[1]
    assert {"relaxed_trajectory.csv", "trace.csv", "control_convexified.csv", "young.csv",
            "relax_summary.txt", "hypotheses.txt"} <= set(outs[0])


def test_verify_detects_tampered_trajectory(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["relax", "--builtin", "P3", "--grid", "20", "--out", str(out)]) == EXIT_OK
    traj, young = out / "relaxed_trajectory.csv", out / "young.csv"
    args = ["verify", "--builtin", "P3", "--grid", "20", "--trajectory", str(traj),
            "--young", str(young), "--out", str(out)]
    assert main(args) == EXIT_OK
    rows = list(csv.reader(traj.open()))
    rows[10][1] = repr(float(rows[10][1]) + 0.5)
    with traj.open("w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    assert main(args) == EXIT_HYPOTHESIS
    err = capsys.readouterr().err
    assert "index 9" in err
    assert (out / "verify.txt").read_text().startswith("FAIL")


def test_verify_solution(tmp_path, capsys):
    code = main(["verify", "--builtin", "P1", "--grid", "20", "--chatter", "2,5",
                 "--sim-K", "200", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "verify.txt").read_text() == "ok\n"


def test_report_table(tmp_path, capsys):
    code = main(["report", "--builtin", "P1", "--chatter", "1,2,5,10", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = list(csv.DictReader((tmp_path / "convergence.csv").open()))
    assert [int(r["n"]) for r in rows] == [1, 2, 5, 10]
    for r in rows:
        n = int(r["n"])
        assert float(r["J"]) == pytest.approx(1 / (12 * n * n), rel=0.2)
    assert (tmp_path / "report.txt").read_text().startswith("m_r = ")


def test_solve_outputs_reparse(tmp_path, capsys):
    assert main(["solve", "--builtin", "P3", "--out", str(tmp_path)]) == EXIT_OK
    traj = read_trajectory_csv(tmp_path / "trajectory.csv")
    u = read_signal_csv(tmp_path / "control.csv")
    assert traj.grid.b == 1.0 and u.grid.b == 1.0
    assert "admissible = True" in (tmp_path / "solve_summary.txt").read_text()
    # feed the control back in
    again = tmp_path / "again"
    assert main(["solve", "--builtin", "P3", "--control", str(tmp_path / "control.csv"),
                 "--out", str(again)]) == EXIT_OK
    assert (again / "trajectory.csv").read_bytes() == (tmp_path / "trajectory.csv").read_bytes()


def test_solve_flags_inadmissible_signal(tmp_path, capsys):
    d = builtin_scenario("P1")
    d["signal"]["value"] = [0.0]  # 0 is not in {-1, 1}
    code = main(["solve", "--scenario", write_scenario(tmp_path, d), "--out", str(tmp_path)])
    assert code == EXIT_HYPOTHESIS
    assert "index = 0" in (tmp_path / "solve_summary.txt").read_text()


def test_argument_errors(capsys):
    with pytest.raises(SystemExit):
        main(["relax"])
    with pytest.raises(SystemExit):
        main(["relax", "--builtin", "P1", "--chatter", "0,x"])


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "monorelax", "validate", "--builtin", "P2",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "H_0: pass" in res.stdout
