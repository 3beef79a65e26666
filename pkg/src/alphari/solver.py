"""Alternating maximization over choice rules and reference distributions."""

from __future__ import annotations

import dataclasses
import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from alphari.information import INFINITE_INFORMATION, alpha_information, integrate
from alphari.problem import Problem, as_choice_rule
from alphari.statewise import TIE_RULES, statewise_solve
from alphari.verify import DEFAULT_TOLERANCE, OptimalityReport, SupportReport, check_optimality, support_report

log = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10
PRUNE_THRESHOLD = 1e-6
POLISH_ITERS = 2000
POLISH_GAP = 1e-2
PROBE_EVERY = 25


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 100_000
    objective_tol: float = 1e-10
    point_tol: float = 1e-9
    restarts: int = 8
    tie_rule: str = "uniform"
    rng_seed: int = 0
    certificate_tol: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not (self.objective_tol > 0 and self.point_tol > 0 and self.certificate_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")
        if self.tie_rule not in TIE_RULES:
            raise ValueError(f"tie_rule must be one of {TIE_RULES}")


@dataclass(frozen=True, eq=False)
class Solution:
    problem: Problem
    rule: np.ndarray
    reference: np.ndarray
    statewise: tuple
    expected_payoff: float
    information: float
    objective: float
    iterations: int
    converged: bool
    certificate: OptimalityReport
    history: tuple = field(default=(), repr=False)
    start: str = "uniform"

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.statewise])


def expected_payoff(P, problem: Problem) -> float:
    P = np.asarray(P, dtype=float)
    return float(problem.prior @ np.sum(P * problem.utility, axis=1))


def objective(P, problem: Problem) -> float:
    """Expected payoff minus ``kappa`` times the alpha-information; ``-inf`` if the latter is infinite."""
    P = as_choice_rule(P, (problem.n_states, problem.n_actions))
    info = alpha_information(P, problem.prior, problem.alpha)
    if math.isinf(info):
        return -math.inf
    return expected_payoff(P, problem) - problem.kappa * info


@dataclass(frozen=True, eq=False)
class _Run:
    rule: np.ndarray
    reference: np.ndarray
    history: tuple
    iterations: int
    settled: bool


def _step(problem: Problem, m: np.ndarray, tie_rule: str):
    """One P-step against ``m`` followed by the m-step; returns ``(P, m', value)``."""
    P = np.stack([statewise_solve(s, m, problem, tie_rule).row for s in range(problem.n_states)])
    m_new, info = integrate(P, problem.prior, problem.alpha)
    if m_new is INFINITE_INFORMATION:
        # each row covers supp m when alpha > -1, so this signals corrupted input
        raise RuntimeError("statewise step produced rows with no common action")
    return P, m_new, expected_payoff(P, problem) - problem.kappa * info


def _extrapolate(m0: np.ndarray, m1: np.ndarray, m2: np.ndarray) -> np.ndarray | None:
    """Squared-extrapolation point from three successive references.

    The step length is shortened until every coordinate of ``supp m0`` stays
    positive, so the support never changes here.  None when no real jump is
    available.
    """
    r = m1 - m0
    v = m2 - 2.0 * m1 + m0
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return None
    s = -np.linalg.norm(r) / nv
    support = m0 > 0
    while s < -1.0:
        m = m0 - 2.0 * s * r + s * s * v
        if np.all(m[support] > 0):
            m = np.where(support, m, 0.0)
            return m / m.sum()
        s = (s - 1.0) / 2.0
        if s > -1.0 + 1e-3:
            break
    return None


def alternate(problem: Problem, m0, config: SolveConfig = SolveConfig(),
              max_iters: int | None = None, resume: _Run | None = None) -> _Run:
    """Coordinate ascent from the reference ``m0`` (or from where ``resume`` stopped).

    Each step solves every state against the current reference and then
    replaces the reference by the alpha-integration of the new rule.  Pairs of
    steps are accelerated by squared extrapolation; an extrapolated point is
    kept only if it does not lower the objective, so the recorded objective
    history never decreases.  ``iterations`` counts plain steps.
    """
    if resume is None:
        m, P, history, done = np.asarray(m0, dtype=float), None, [], 0
    else:
        m, P, history, done = resume.reference, resume.rule, list(resume.history), resume.iterations
    budget = config.max_iters - done if max_iters is None else min(max_iters, config.max_iters - done)
    stop = done + budget
    it = done
    settled = False
    while it < stop:
        P1, m1, v1 = _step(problem, m, config.tie_rule)
        it += 1
        if P is None or it >= stop:
            step = np.max(np.abs(m1 - m)) if P is None else max(np.max(np.abs(m1 - m)), np.max(np.abs(P1 - P)))
            gain = v1 - history[-1] if history else math.inf
            history.append(v1)
            P, m = P1, m1
            if gain < config.objective_tol and step < config.point_tol:
                settled = True
                break
            continue
        P2, m2, v2 = _step(problem, m1, config.tie_rule)
        it += 1
        before = history[-1]
        history.extend((v1, v2))
        new_P, new_m, new_v = P2, m2, v2
        jump = _extrapolate(m, m1, m2) if it < stop else None
        if jump is not None:
            P3, m3, v3 = _step(problem, jump, config.tie_rule)
            it += 1
            if v3 >= v2:
                history.append(v3)
                new_P, new_m, new_v = P3, m3, v3
        step = max(np.max(np.abs(new_m - m)), np.max(np.abs(new_P - P)))
        gain = new_v - before
        P, m = new_P, new_m
        if gain < config.objective_tol and step < config.point_tol:
            settled = True
            break
    return _Run(P, m, tuple(history), it, settled)


def _finish(problem: Problem, run: _Run, config: SolveConfig, start: str) -> Solution:
    cert = check_optimality(run.rule, problem, config.certificate_tol, config.tie_rule)
    sols = tuple(statewise_solve(s, run.reference, problem, config.tie_rule)
                 for s in range(problem.n_states))
    info = alpha_information(run.rule, problem.prior, problem.alpha)
    pay = expected_payoff(run.rule, problem)
    value = -math.inf if math.isinf(info) else pay - problem.kappa * info
    run.rule.setflags(write=False)
    run.reference.setflags(write=False)
    return Solution(problem, run.rule, run.reference, sols, pay, info, value, run.iterations,
                    bool(run.settled and cert.overall), cert, run.history, start)


def _predicted_support(snapshots: list[np.ndarray]) -> frozenset:
    """Actions expected to keep positive reference mass.

    An action is dropped once its mass is below ``PRUNE_THRESHOLD`` and still
    falling, or when its last three snapshots fall monotonically and Aitken
    extrapolation puts the limit at (nearly) zero, which is what geometric
    decay toward the boundary looks like.
    """
    last = snapshots[-1]
    keep = last > 0
    if len(snapshots) >= 2:
        keep &= ~((last <= PRUNE_THRESHOLD) & (last < snapshots[-2]))
    if len(snapshots) >= 3:
        x0, x1, x2 = snapshots[-3:]
        d1, d2 = x1 - x0, x2 - x1
        curv = d2 - d1
        with np.errstate(divide="ignore", invalid="ignore"):
            limit = np.where(curv != 0, x2 - d2 * d2 / curv, x2)
        fading = (d1 < 0) & (d2 < 0) & (limit < 1e-2 * x2)
        keep &= ~fading
    return frozenset(np.flatnonzero(keep).tolist())


def _uniform_on(support, n: int) -> np.ndarray:
    m = np.zeros(n)
    m[list(support)] = 1.0 / len(support)
    return m


def solve(problem: Problem, config: SolveConfig = SolveConfig()) -> Solution:
    """Optimal choice rule with its optimality certificate.

    Alternation starts from the uniform reference.  Actions whose reference
    mass is visibly decaying to zero are pruned early by restarting on the
    surviving support.  If nothing certifies, every nonempty support is tried
    (at most 10 actions), then random interior starts.  Returns the best
    certified attempt, or the best attempt overall flagged as not converged.
    """
    n = problem.n_actions
    tried: set[frozenset] = set()
    attempts: list[Solution] = []

    def descend(m0: np.ndarray, start: str) -> Solution:
        support = frozenset(np.flatnonzero(m0 > 0).tolist())
        tried.add(support)
        run = alternate(problem, m0, config, max_iters=PROBE_EVERY)
        snapshots = [run.reference]
        while not run.settled and run.iterations < config.max_iters:
            survivors = _predicted_support(snapshots)
            if survivors and survivors < support and survivors not in tried:
                idx = sorted(survivors)
                m1 = np.zeros(n)
                m1[idx] = run.reference[idx]
                child = descend(m1 / m1.sum(), f"support {idx}")
                if child.converged:
                    return child
            run = alternate(problem, None, config, max_iters=PROBE_EVERY, resume=run)
            snapshots.append(run.reference)
        sol = _finish(problem, run, config, start)
        # slow linear convergence can look settled well before the certificate
        # tolerance is met; keep going with the stopping rule switched off
        strict = dataclasses.replace(config, objective_tol=1e-300, point_tol=1e-300)
        limit = run.iterations + POLISH_ITERS
        while (not sol.converged and sol.certificate.support_gap < POLISH_GAP
               and run.iterations < min(limit, config.max_iters)):
            run = alternate(problem, None, strict, max_iters=PROBE_EVERY, resume=run)
            sol = _finish(problem, dataclasses.replace(run, settled=True), config, start)
            if run.settled:
                break
        attempts.append(sol)
        log.debug("start=%s objective=%.12g certified=%s", start, sol.objective, sol.converged)
        return sol

    def guarded(sol: Solution) -> Solution:
        # a pass that leans on the alpha = 1 exclusion is cross-checked against
        # a run that also gives the excluded actions reference mass
        if not sol.certificate.excluded:
            return sol
        wider = frozenset(np.flatnonzero(sol.reference > 0).tolist()) | set(sol.certificate.excluded)
        if wider in tried:
            return sol
        alt = descend(_uniform_on(wider, n), f"support {sorted(wider)}")
        margin = config.objective_tol * (1.0 + abs(sol.objective))
        if alt.objective > sol.objective + margin:
            log.warning("alpha = 1 exclusion check: wider support improves the objective by %.3g",
                        alt.objective - sol.objective)
            return alt
        return sol

    first = descend(np.full(n, 1.0 / n), "uniform")
    if first.converged:
        return guarded(first)

    if n <= ENUMERATION_LIMIT:
        for k in range(1, n + 1):
            for subset in itertools.combinations(range(n), k):
                if frozenset(subset) not in tried:
                    descend(_uniform_on(subset, n), f"support {list(subset)}")

    if not any(a.converged for a in attempts):
        rng = np.random.default_rng(config.rng_seed)
        for r in range(config.restarts):
            if descend(rng.dirichlet(np.ones(n)), f"random {r}").converged:
                break

    certified = [a for a in attempts if a.converged]
    pool = certified or attempts
    return guarded(max(pool, key=lambda a: a.objective))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ALPHARI_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class SweepEntry:
    alpha: float
    solution: Solution | None
    support: SupportReport | None
    error: str | None = None


def sweep(problem: Problem, alphas, config: SolveConfig = SolveConfig()) -> list[SweepEntry]:
    """Independent solve for each alpha; failures are recorded and the sweep continues."""
    alphas = [float(a) for a in alphas]
    if any(not math.isfinite(a) for a in alphas):
        raise ValueError("alphas must be finite")

    def one(alpha: float) -> SweepEntry:
        p = problem.with_alpha(alpha)
        try:
            sol = solve(p, config)
            return SweepEntry(alpha, sol, support_report(sol.rule, p))
        except Exception as exc:  # recorded per alpha, never aborts the sweep
            log.warning("alpha=%g failed: %s", alpha, exc)
            return SweepEntry(alpha, None, None, f"{type(exc).__name__}: {exc}")

    workers = min(_threads(), len(alphas)) or 1
    if workers == 1:
        return [one(a) for a in alphas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, alphas))
