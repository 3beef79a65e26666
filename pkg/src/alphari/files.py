"""Problem files, solution files and sweep tables.

Problem and solution files are JSON documents.  Floats are written with
Python's shortest round-trip representation, so reading a file back gives
the identical numbers; positive infinity is written as the string
``"infinite"``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re

import numpy as np

from alphari.core_math import q_of_alpha
from alphari.problem import Problem
from alphari.verify import OptimalityReport, SupportReport, regime_of

log = logging.getLogger(__name__)

INFINITE_TOKEN = "infinite"
PROBLEM_FIELDS = ("states", "actions", "prior", "utility", "alpha", "kappa")
PRIOR_EXACT_TOL = 1e-9
PRIOR_RENORMALIZE_TOL = 1e-6
SOLUTION_FORMAT = "alphari-solution/1"


class SchemaError(ValueError):
    """A problem or rule file violates the schema."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def _line_of(text: str, key: str) -> int | None:
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, match.start()) + 1 if match else None


def _parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON ({exc.msg}), column {exc.colno}", line=exc.lineno) from None


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _labels(doc: dict, key: str, text: str) -> list[str]:
    value = doc[key]
    if not isinstance(value, list) or not value:
        raise SchemaError("must be a nonempty list of labels", key, _line_of(text, key))
    labels = [str(v) for v in value]
    if len(set(labels)) != len(labels):
        raise SchemaError("labels must be distinct", key, _line_of(text, key))
    return labels


def _finite_number(doc: dict, key: str, text: str) -> float:
    value = doc[key]
    if not _is_number(value) or not math.isfinite(value):
        raise SchemaError(f"must be a finite number, got {value!r}", key, _line_of(text, key))
    return float(value)


def parse_problem(text: str) -> Problem:
    """Validate a problem document and build the :class:`Problem`.

    A prior whose sum is off by more than 1e-9 but at most 1e-6 is
    renormalized with a warning; anything further off is rejected.
    """
    doc = _parse_json(text)
    if not isinstance(doc, dict):
        raise SchemaError("problem file must be a JSON object", line=1)
    missing = [k for k in PROBLEM_FIELDS if k not in doc]
    if missing:
        raise SchemaError(f"missing required field(s) {missing}", missing[0])
    extra = sorted(set(doc) - set(PROBLEM_FIELDS))
    if extra:
        raise SchemaError(f"unknown field(s) {extra}", extra[0], _line_of(text, extra[0]))

    states = _labels(doc, "states", text)
    actions = _labels(doc, "actions", text)

    prior = doc["prior"]
    line = _line_of(text, "prior")
    if not isinstance(prior, list) or len(prior) != len(states):
        raise SchemaError(f"must be a list of {len(states)} numbers (one per state)", "prior", line)
    if not all(_is_number(p) and math.isfinite(p) for p in prior):
        raise SchemaError("entries must be finite numbers", "prior", line)
    prior = np.array(prior, dtype=float)
    if np.any(prior <= 0):
        raise SchemaError("entries must be strictly positive", "prior", line)
    total = prior.sum()
    if abs(total - 1.0) > PRIOR_RENORMALIZE_TOL:
        raise SchemaError(f"entries must sum to 1, they sum to {total!r}", "prior", line)
    if abs(total - 1.0) > PRIOR_EXACT_TOL:
        log.warning("prior sums to %r; renormalized", float(total))
        prior = prior / total

    utility = doc["utility"]
    line = _line_of(text, "utility")
    if not isinstance(utility, list) or len(utility) != len(states):
        raise SchemaError(f"must have {len(states)} rows (one per state)", "utility", line)
    for i, row in enumerate(utility):
        if not isinstance(row, list) or len(row) != len(actions):
            raise SchemaError(f"row {i} must have {len(actions)} entries (one per action)", "utility", line)
        if not all(_is_number(x) and math.isfinite(x) for x in row):
            raise SchemaError(f"row {i} has a non-finite or non-numeric entry", "utility", line)

    alpha = _finite_number(doc, "alpha", text)
    kappa = _finite_number(doc, "kappa", text)
    if kappa <= 0:
        raise SchemaError(f"must be positive, got {kappa!r}", "kappa", _line_of(text, "kappa"))
    return Problem.create(prior, np.array(utility, dtype=float), alpha, kappa,
                          states=tuple(states), actions=tuple(actions))


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def problem_document(problem: Problem) -> dict:
    return {
        "states": list(problem.states),
        "actions": list(problem.actions),
        "prior": problem.prior.tolist(),
        "utility": problem.utility.tolist(),
        "alpha": problem.alpha,
        "kappa": problem.kappa,
    }


def parse_rule(text: str, problem: Problem) -> np.ndarray:
    """A choice rule given as a bare matrix or as the ``rule`` entry of an object."""
    doc = _parse_json(text)
    if isinstance(doc, dict):
        if "rule" not in doc:
            raise SchemaError("object has no 'rule' entry", "rule")
        doc = doc["rule"]
    shape = (problem.n_states, problem.n_actions)
    try:
        P = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("must be a numeric matrix", "rule") from None
    if P.shape != shape:
        raise SchemaError(f"must have shape {shape}, got {P.shape}", "rule")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise SchemaError("entries must be finite and nonnegative", "rule")
    bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > 1e-9)
    if bad.size:
        raise SchemaError(f"row {int(bad[0])} does not sum to 1", "rule")
    return P / P.sum(axis=1, keepdims=True)


def load_rule(path, problem: Problem) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_rule(fh.read(), problem)


def _encode(x):
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return INFINITE_TOKEN if x > 0 else "-" + INFINITE_TOKEN
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _decode(x):
    if isinstance(x, dict):
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    if x == INFINITE_TOKEN:
        return math.inf
    if x == "-" + INFINITE_TOKEN:
        return -math.inf
    return x


def dumps(doc: dict) -> str:
    return json.dumps(_encode(doc), indent=2, allow_nan=False) + "\n"


def _labels_of(indices, labels) -> list[str]:
    return [labels[i] for i in sorted(indices)]


def support_document(report: SupportReport, problem: Problem) -> dict:
    return {
        "regime": report.regime.value,
        "S_m": _labels_of(report.S_m, problem.actions),
        "S_theta": {s: _labels_of(row, problem.actions) for s, row in zip(problem.states, report.S_theta)},
        "consideration_set": _labels_of(report.consideration_set, problem.actions),
        "common_support": _labels_of(report.common_support, problem.actions),
        "violations": report.violations(),
    }


def optimality_document(report: OptimalityReport, problem: Problem) -> dict:
    return {
        "overall": report.overall,
        "tolerance": report.tolerance,
        "statewise_ok": dict(zip(problem.states, report.statewise_ok)),
        "condition2_values": dict(zip(problem.actions, report.condition2_values.tolist())),
        "extremum_kind": report.extremum_kind,
        "extremum": report.extremum,
        "support_gap": report.support_gap,
        "row_gap": report.row_gap,
        "excluded": _labels_of(report.excluded, problem.actions),
        "notes": list(report.notes),
    }


def solution_document(solution, support: SupportReport, config) -> dict:
    """Everything needed to reproduce and audit a solve, in file order."""
    p = solution.problem
    return {
        "format": SOLUTION_FORMAT,
        "problem": problem_document(p),
        "rule": solution.rule,
        "reference": solution.reference,
        "statewise": [
            {
                "state": label,
                "lambda": s.lam,
                "nu": s.nu,
                "branch": s.branch.value,
                "maximizer_set": _labels_of(s.maximizer_set, p.actions),
                "residual_mass": s.residual_mass,
            }
            for label, s in zip(p.states, solution.statewise)
        ],
        "expected_payoff": solution.expected_payoff,
        "information": solution.information,
        "objective": solution.objective,
        "support": support_document(support, p),
        "optimality": optimality_document(solution.certificate, p),
        "solver": {
            "converged": solution.converged,
            "iterations": solution.iterations,
            "start": solution.start,
            "seed": config.rng_seed,
            "restarts": config.restarts,
            "max_iters": config.max_iters,
            "objective_tol": config.objective_tol,
            "point_tol": config.point_tol,
            "certificate_tol": config.certificate_tol,
            "tie_rule": config.tie_rule,
        },
    }


def read_solution(text: str) -> dict:
    """Parse a solution file; ``"infinite"`` tokens come back as ``math.inf``."""
    doc = _decode(_parse_json(text))
    if not isinstance(doc, dict) or doc.get("format") != SOLUTION_FORMAT:
        raise SchemaError(f"not a {SOLUTION_FORMAT} document", "format")
    return doc


def _num(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return INFINITE_TOKEN if x > 0 else "-" + INFINITE_TOKEN
    return repr(x)


def _support_cell(indices, labels) -> str:
    return "|".join(_labels_of(indices, labels))


def sweep_header(problem: Problem) -> list[str]:
    cols = ["alpha", "q_alpha", "regime"]
    cols += [f"m_{a}" for a in problem.actions]
    cols += [f"P_{s}_{a}" for s in problem.states for a in problem.actions]
    cols += ["S_m"] + [f"S_{s}" for s in problem.states]
    cols += ["objective", "information", "status"]
    return cols


def sweep_csv(problem: Problem, entries) -> str:
    """One row per alpha; '.' decimals, LF line endings, header first."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(sweep_header(problem))
    width = problem.n_actions * (1 + problem.n_states) + 1 + problem.n_states + 2
    for e in entries:
        head = [_num(e.alpha), _num(q_of_alpha(e.alpha)), regime_of(e.alpha).value]
        if e.solution is None:
            writer.writerow(head + [""] * width + [f"error: {e.error}"])
            continue
        sol, sup = e.solution, e.support
        row = head + [_num(x) for x in sol.reference]
        row += [_num(x) for x in sol.rule.ravel()]
        row += [_support_cell(sup.S_m, problem.actions)]
        row += [_support_cell(s, problem.actions) for s in sup.S_theta]
        row += [_num(sol.objective), _num(sol.information),
                "certified" if sol.converged else "uncertified"]
        writer.writerow(row)
    return buf.getvalue()
