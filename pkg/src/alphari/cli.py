"""Command-line interface: ``alphari {solve,check,sweep,divergence,info}``.

Exit codes: 0 success (certified solve, passing check), 1 malformed input,
2 an uncertified solve, a failing check or a failed sweep entry.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from alphari.files import (
    INFINITE_TOKEN,
    SchemaError,
    dumps,
    load_problem,
    load_rule,
    solution_document,
    sweep_csv,
)
from alphari.information import INFINITE_INFORMATION, alpha_divergence, alpha_integration, alpha_information
from alphari.problem import Problem
from alphari.solver import SolveConfig, solve, sweep
from alphari.statewise import TIE_RULES
from alphari.verify import DEFAULT_TOLERANCE, check_optimality, regime_of, support_report

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("alphari")


def _fmt(x: float) -> str:
    if math.isinf(x):
        return INFINITE_TOKEN if x > 0 else "-" + INFINITE_TOKEN
    return repr(float(x))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _config(args) -> SolveConfig:
    return SolveConfig(restarts=args.restarts, tie_rule=args.tie_rule, rng_seed=args.seed,
                       certificate_tol=args.tol)


def _problem(args) -> Problem:
    problem = load_problem(args.problem)
    if getattr(args, "alpha_override", None) is not None:
        problem = problem.with_alpha(args.alpha_override)
    return problem


def cmd_solve(args) -> int:
    problem = _problem(args)
    config = _config(args)
    sol = solve(problem, config)
    doc = solution_document(sol, support_report(sol.rule, problem), config)
    _write(dumps(doc), args.out)
    if not sol.converged:
        log.warning("solution not certified (support gap %.3g)", sol.certificate.support_gap)
        return EXIT_FAIL
    return EXIT_OK


def cmd_check(args) -> int:
    problem = _problem(args)
    P = load_rule(args.rule, problem)
    report = check_optimality(P, problem, args.tol, args.tie_rule)
    out = [f"alpha: {_fmt(problem.alpha)}", f"regime: {regime_of(problem.alpha).value}",
           f"extremum kind: {report.extremum_kind}"]
    if report.reference is None:
        out.append("information: infinite (rows share no action)")
        out.append("result: FAIL")
        _write("\n".join(out) + "\n", args.out)
        return EXIT_FAIL
    width = max(len("action"), *(len(a) for a in problem.actions))
    out.append(f"{'action':<{width}}  {'in supp m':<9}  condition2")
    for b, label in enumerate(problem.actions):
        inside = "yes" if report.reference[b] > 0 else "no"
        out.append(f"{label:<{width}}  {inside:<9}  {_fmt(report.condition2_values[b])}")
    out.append(f"extremum: {_fmt(report.extremum)}")
    for label, ok in zip(problem.states, report.statewise_ok):
        out.append(f"statewise {label}: {'ok' if ok else 'mismatch'}")
    out.append(f"row gap: {_fmt(report.row_gap)}")
    out.append(f"support gap: {_fmt(report.support_gap)} (tolerance {_fmt(report.tolerance)})")
    if not report.overall:
        worst = report.worst_action
        if worst is not None and report.support_gap > report.tolerance:
            out.append(f"worst action: {problem.actions[worst]}")
        if report.row_gap > report.tolerance:
            s = report.worst_state
            out.append(f"worst state: {problem.states[s]} (row gap {_fmt(report.row_gaps[s])})")
    out.extend(f"note: {n}" for n in report.notes)
    out.append(f"result: {'PASS' if report.overall else 'FAIL'}")
    _write("\n".join(out) + "\n", args.out)
    return EXIT_OK if report.overall else EXIT_FAIL


def cmd_sweep(args) -> int:
    problem = load_problem(args.problem)
    entries = sweep(problem, args.alphas, _config(args))
    _write(sweep_csv(problem, entries), args.csv)
    bad = [e.alpha for e in entries if e.solution is None or not e.solution.converged]
    if bad:
        log.warning("failed or uncertified at alpha %s", bad)
        return EXIT_FAIL
    return EXIT_OK


def cmd_divergence(args) -> int:
    p, m = np.array(args.p), np.array(args.m)
    for name, v in (("p", p), ("m", m)):
        if v.size == 0 or np.any(v < 0) or not np.all(np.isfinite(v)) or abs(v.sum() - 1.0) > 1e-9:
            raise SchemaError("must be a probability vector", name)
    if p.size != m.size:
        raise SchemaError("p and m must have the same length", "m")
    _write(_fmt(alpha_divergence(p, m, args.alpha)) + "\n", args.out)
    return EXIT_OK


def cmd_info(args) -> int:
    problem = _problem(args)
    P = load_rule(args.rule, problem)
    info = alpha_information(P, problem.prior, problem.alpha)
    m = alpha_integration(P, problem.prior, problem.alpha)
    out = [f"information: {_fmt(info)}"]
    if m is INFINITE_INFORMATION:
        out.append(f"reference: {INFINITE_TOKEN} (empty common support)")
    else:
        out.append("reference: " + " ".join(f"{a}={_fmt(x)}" for a, x in zip(problem.actions, m)))
    _write("\n".join(out) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphari",
                                     description="Rational inattention with alpha-divergence costs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--seed", type=int, default=0, help="seed for random restarts")
        p.add_argument("--restarts", type=int, default=SolveConfig.restarts)
        p.add_argument("--tie-rule", choices=TIE_RULES, default="uniform")
        p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                       help="certificate tolerance on condition-2 gaps")

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem")
    p.add_argument("--out", help="write the solution file here instead of stdout")
    p.add_argument("--alpha-override", type=float)
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="test a choice rule for optimality")
    p.add_argument("problem")
    p.add_argument("rule", help="JSON matrix, or a solution file")
    p.add_argument("--out")
    p.add_argument("--alpha-override", type=float)
    p.add_argument("--tie-rule", choices=TIE_RULES, default="uniform")
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="solve for several alphas and tabulate")
    p.add_argument("problem")
    p.add_argument("--alphas", type=_floats, default=[-6.0, -3.0, -1.0, 0.0, 1.0, 3.0])
    p.add_argument("--csv", help="write the table here instead of stdout")
    solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("divergence", help="alpha-divergence D[p : m]")
    p.add_argument("p", type=_floats)
    p.add_argument("m", type=_floats)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("info", help="alpha-information and alpha-integration of a rule")
    p.add_argument("problem")
    p.add_argument("rule")
    p.add_argument("--out")
    p.add_argument("--alpha-override", type=float)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; malformed input is exit 1 here
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "tol", 1.0) <= 0 or getattr(args, "restarts", 0) < 0:
        print("error: --tol must be positive and --restarts nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
