"""Command-line entry point.

Commands
--------
validate  probe the declared hypotheses
solve     simulate the scenario's control (or ``--control CSV``)
relax     solve the relaxed problem (both relaxations share one inner solve)
chatter   relax, then chatter and correct for every ``n`` in the chatter list
verify    admissibility and invariant checks on a relaxed solution or given files
report    relax, chatter and summarize the value estimates

Exit codes: 0 success, 1 I/O or schema error, 2 hypothesis or
admissibility failure, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .chattering import chatter_realize, convergence_table, feedback_correct, write_convergence_csv
from .controls import ControlSignal, read_signal_csv, write_signal_csv
from .dynamics import read_trajectory_csv, solve_controlled, write_trajectory_csv
from .errors import HypothesisError, InadmissiblePair, MonorelaxError, SupportViolation
from .library import BUILTINS, builtin_scenario
from .optimizer import estimate_original, solve_relaxed, write_report, write_trace_csv
from .relax_convex import check_admissible, cost_J
from .relax_young import read_young_csv, young_support_check, write_young_csv
from .scenario import ScenarioError, check_hypotheses, load_scenario, parse_scenario

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_IO", "EXIT_HYPOTHESIS", "EXIT_NONCONVERGED"]

log = logging.getLogger("monorelax")

EXIT_OK = 0
EXIT_IO = 1
EXIT_HYPOTHESIS = 2
EXIT_NONCONVERGED = 3

COMMANDS = ("validate", "solve", "relax", "chatter", "verify", "report")


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _chatter_list(text):
    try:
        vals = sorted({int(v) for v in text.split(",") if v.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or vals[0] < 1:
        raise argparse.ArgumentTypeError("cycle counts must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monorelax", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="PATH", help="scenario JSON file")
    src.add_argument("--builtin", choices=sorted(BUILTINS), help="built-in scenario")
    ap.add_argument("--out", metavar="DIR", help="output directory (default: scenario output.dir or ./out)")
    ap.add_argument("--grid", type=int, metavar="K", help="number of base intervals")
    ap.add_argument("--atoms", type=int, metavar="N", help="size of the net for U(t, x)")
    ap.add_argument("--chatter", type=_chatter_list, metavar="LIST", help="cycle counts, e.g. 1,2,5,10")
    ap.add_argument("--sim-K", type=int, metavar="K", help="uniform simulation mesh for chattered pairs")
    ap.add_argument("--seed", type=int, metavar="S", help="seed for hypothesis probes")
    ap.add_argument("--mode", choices=("convexified", "young", "both"), default="both")
    ap.add_argument("--trajectory", metavar="CSV", help="verify: trajectory file")
    ap.add_argument("--control", metavar="CSV", help="solve/verify: control signal file")
    ap.add_argument("--young", metavar="CSV", help="verify: Young control file")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load(args):
    data = builtin_scenario(args.builtin) if args.builtin else load_scenario(args.scenario)
    sc = parse_scenario(data, grid=args.grid, atoms=args.atoms)
    seed = sc.numerics.seed if args.seed is None else args.seed
    return sc, seed


def _out_dir(args, sc):
    out = args.out or sc.output_dir or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _relax(sc, out, mode):
    sol = solve_relaxed(sc.problem, mode="young" if mode == "both" else mode,
                        options=sc.numerics.solver)
    write_trajectory_csv(sol.trajectory, os.path.join(out, "relaxed_trajectory.csv"))
    write_trace_csv(sol.trace, os.path.join(out, "trace.csv"))
    lines = [f"scenario = {sc.problem.name}", f"K = {sc.problem.K}", f"atoms = {sc.problem.n_atoms}"]
    if mode in ("convexified", "both"):
        write_signal_csv(sol.barycenter, os.path.join(out, "control_convexified.csv"))
        lines.append(f"m_r = {sol.m_r!r}")
    if mode in ("young", "both"):
        write_young_csv(sol.young, os.path.join(out, "young.csv"))
        lines.append(f"m_hat_r = {sol.m_hat_r!r}")
    lines += [f"converged = {sol.converged}",
              f"ties = {','.join(sol.ties) if sol.ties else 'none'}"]
    lines += [f"start {k}: value={v!r} converged={c}" for k, (v, c) in sol.starts.items()]
    _write_lines(os.path.join(out, "relax_summary.txt"), lines)
    for ln in lines:
        print(ln)
    return sol


def _cmd_solve(args, sc, out):
    p = sc.problem
    if args.control:
        u = read_signal_csv(args.control)
        traj = solve_controlled(p, u)
    elif sc.signal is not None and sc.signal["kind"] == "constant":
        u = ControlSignal.constant(p.grid, sc.signal["value"])
        traj = solve_controlled(p, u)
    elif sc.signal is not None:
        target = ControlSignal.constant(p.grid, sc.signal["value"])
        traj, u, _ = feedback_correct(p, target, 1, sim_K=sc.numerics.sim_K)
    else:
        raise _Failure(EXIT_IO, "no control to simulate: give --control or a 'signal' block")
    write_trajectory_csv(traj, os.path.join(out, "trajectory.csv"))
    write_signal_csv(u, os.path.join(out, "control.csv"))
    rep = check_admissible(p, traj, u, "original")
    lines = [f"admissible = {rep.ok}", f"max_control_distance = {rep.max_control_distance!r}"]
    if rep.ok:
        lines.append(f"J = {cost_J(p, traj, u, check=False)!r}")
    else:
        lines.append(f"reason = {rep.reason}")
        lines.append(f"index = {rep.index}")
    _write_lines(os.path.join(out, "solve_summary.txt"), lines)
    for ln in lines:
        print(ln)
    return EXIT_OK if rep.ok else EXIT_HYPOTHESIS


def _chatter_n(args, sc):
    return args.chatter or list(sc.numerics.chatter)


def _sim_K(args, sc):
    return args.sim_K if args.sim_K is not None else sc.numerics.sim_K


def _cmd_relax(args, sc, out):
    sol = _relax(sc, out, args.mode)
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def _cmd_chatter(args, sc, out):
    sol = _relax(sc, out, args.mode)
    table = convergence_table(sc.problem, sol.trajectory, sol.young, _chatter_n(args, sc),
                              m_r=sol.m_r, sim_K=_sim_K(args, sc))
    write_convergence_csv(table, os.path.join(out, "convergence.csv"))
    for r in table:
        print(f"n={r.n} weak_gap={r.weak_gap!r} state_gap={r.state_gap!r} J={r.J!r}")
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def _cmd_report(args, sc, out):
    sol = _relax(sc, out, args.mode)
    rep = estimate_original(sc.problem, sol, _chatter_n(args, sc), sim_K=_sim_K(args, sc))
    write_report(rep, os.path.join(out, "report.txt"), os.path.join(out, "convergence.csv"))
    for ln in rep.summary_lines():
        print(ln)
    return EXIT_OK if rep.converged else EXIT_NONCONVERGED


def _verify_files(args, sc):
    p = sc.problem
    if not args.trajectory:
        raise _Failure(EXIT_IO, "verify with files needs --trajectory")
    traj = read_trajectory_csv(args.trajectory)
    failures = []
    if args.control:
        u = read_signal_csv(args.control)
        mode = "convexified" if args.mode == "convexified" else "original"
        rep = check_admissible(p, traj, u, mode)
        print(f"admissible ({mode}) = {rep.ok}")
        if not rep.ok:
            failures.append(f"{rep.reason} (index {rep.index})")
    if args.young:
        from .dynamics import solve_young

        lam = read_young_csv(args.young, p.horizon)
        if lam.grid != traj.grid:
            failures.append("Young control and trajectory grids differ (index 0)")
        else:
            sup = young_support_check(p, traj, lam)
            print(f"young support = {sup.ok}")
            if not sup.ok:
                failures.append(f"atom {sup.i} outside U(t_k, x_k) (index {sup.k})")
            replay = solve_young(p, lam)
            err = np.linalg.norm(replay.states - traj.states, axis=1)
            bad = np.nonzero(err > 1e-8)[0]
            if len(bad):
                failures.append(f"state deviates {err[bad[0]]:.3e} from the dynamics (index {bad[0]})")
    if not args.control and not args.young:
        raise _Failure(EXIT_IO, "verify with --trajectory needs --control or --young")
    return failures


def _verify_solution(args, sc, out):
    p = sc.problem
    sol = _relax(sc, out, "both")
    failures = []
    rep = check_admissible(p, sol.trajectory, sol.barycenter, "convexified")
    print(f"relaxed pair admissible (convexified) = {rep.ok}")
    if not rep.ok:
        failures.append(f"relaxed pair: {rep.reason} (index {rep.index})")
    sup = young_support_check(p, sol.trajectory, sol.young)
    print(f"young support = {sup.ok}")
    if not sup.ok:
        failures.append(f"atom {sup.i} outside U(t_k, x_k) (index {sup.k})")
    if abs(sol.m_r - sol.m_hat_r) > 1e-9:
        failures.append(f"relaxed values disagree: m_r={sol.m_r!r} m_hat_r={sol.m_hat_r!r}")
    for n in _chatter_n(args, sc):
        signal = chatter_realize(sol.young, n, merge=True)
        traj, v, slack = feedback_correct(p, signal, n, reference=sol.trajectory, sim_K=_sim_K(args, sc))
        r = check_admissible(p, traj, v, "original")
        print(f"n={n} corrected pair admissible = {r.ok} V_n slack = {slack!r}")
        if not r.ok:
            failures.append(f"n={n}: {r.reason} (index {r.index})")
    return failures, sol.converged


def _cmd_verify(args, sc, out):
    converged = True
    if args.trajectory or args.control or args.young:
        failures = _verify_files(args, sc)
    else:
        failures, converged = _verify_solution(args, sc, out)
    _write_lines(os.path.join(out, "verify.txt"), ["ok" if not failures else "FAIL"] + failures)
    for f in failures:
        print(f"verify failure: {f}", file=sys.stderr)
    if failures:
        return EXIT_HYPOTHESIS
    return EXIT_OK if converged else EXIT_NONCONVERGED


def run(args) -> int:
    sc, seed = _load(args)
    report = check_hypotheses(sc.problem, seed=seed)
    out = _out_dir(args, sc)
    _write_lines(os.path.join(out, "hypotheses.txt"), report.lines())
    if args.command == "validate" or not report.ok:
        stream = sys.stdout if report.ok else sys.stderr
        for ln in report.lines():
            print(ln, file=stream)
        return EXIT_OK if report.ok else EXIT_HYPOTHESIS
    handler = {"solve": _cmd_solve, "relax": _cmd_relax, "chatter": _cmd_chatter,
               "verify": _cmd_verify, "report": _cmd_report}[args.command]
    return handler(args, sc, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (HypothesisError, InadmissiblePair, SupportViolation) as exc:
        witness = getattr(exc, "witness", None)
        print(f"hypothesis failure: {exc}" + (f" witness={witness}" if witness else ""), file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, MonorelaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
