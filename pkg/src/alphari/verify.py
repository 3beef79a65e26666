"""Optimality certificate, support classification and an exhaustive grid oracle."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from alphari.core_math import DomainError, fused_h_qexp
from alphari.information import INFINITE_INFORMATION, alpha_integration
from alphari.problem import Problem, as_choice_rule
from alphari.statewise import statewise_solve

DEFAULT_TOLERANCE = 1e-7


class Regime(str, enum.Enum):
    CUTOFF = "CutoffRegime"
    FULL_SUPPORT = "FullSupportRegime"
    COMMON_SUPPORT = "CommonSupportRegime"


def regime_of(alpha: float) -> Regime:
    if alpha < -1.0:
        return Regime.CUTOFF
    if alpha < 1.0:
        return Regime.FULL_SUPPORT
    return Regime.COMMON_SUPPORT


@dataclass(frozen=True, eq=False)
class OptimalityReport:
    """Outcome of the two-part optimality check for a choice rule.

    ``condition2_values[b]`` is the prior-weighted sum over states of the fused
    kernel at action ``b``.  On the support of the reference these must all hit
    the maximum over actions (alpha <= 1) or the minimum (alpha > 1).
    """

    statewise_ok: tuple
    condition2_values: np.ndarray
    extremum: float
    extremum_kind: str
    support_gap: float
    overall: bool
    tolerance: float
    reference: np.ndarray | None
    lambdas: np.ndarray | None
    row_gap: float
    notes: tuple = ()
    excluded: tuple = ()
    row_gaps: tuple = ()

    @property
    def worst_state(self) -> int | None:
        if not self.row_gaps:
            return None
        return int(np.argmax(self.row_gaps))

    @property
    def worst_action(self) -> int | None:
        if self.reference is None:
            return None
        support = np.flatnonzero(self.reference > 0)
        gaps = _gaps(self.condition2_values[support], self.extremum)
        return int(support[np.argmax(gaps)])


def _gaps(values: np.ndarray, extremum: float) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        out = np.abs(values - extremum)
    both_inf = np.isinf(values) & np.isinf(extremum) & (np.sign(values) == np.sign(extremum))
    out[both_inf] = 0.0
    return out


def _row_gap(row: np.ndarray, target, tie_set: tuple) -> float:
    if len(tie_set) > 1:
        # residual mass may be split arbitrarily among tied outside maximizers
        idx = list(tie_set)
        rest = np.setdiff1d(np.arange(row.size), idx)
        gap = np.max(np.abs(row[rest] - target.row[rest])) if rest.size else 0.0
        return max(gap, abs(row[idx].sum() - target.row[idx].sum()))
    return float(np.max(np.abs(row - target.row)))


def check_optimality(P, problem: Problem, tolerance: float = DEFAULT_TOLERANCE,
                     tie_rule: str = "uniform") -> OptimalityReport:
    """Test both optimality conditions for ``P``.

    Multipliers are re-derived from the alpha-integration of ``P`` by the
    statewise branch logic; nothing is taken from the caller.  Returns a
    failing report (never raises) when ``P`` has infinite information.
    """
    P = as_choice_rule(P, (problem.n_states, problem.n_actions))
    kind = "max" if problem.alpha <= 1.0 else "min"
    m = alpha_integration(P, problem.prior, problem.alpha)
    if m is INFINITE_INFORMATION:
        return OptimalityReport(
            statewise_ok=(False,) * problem.n_states,
            condition2_values=np.full(problem.n_actions, np.nan),
            extremum=math.nan, extremum_kind=kind, support_gap=math.inf, overall=False,
            tolerance=tolerance, reference=None, lambdas=None, row_gap=math.inf,
            notes=("infinite information: rows share no action",),
        )

    sols = [statewise_solve(s, m, problem, tie_rule) for s in range(problem.n_states)]
    lambdas = np.array([s.lam for s in sols])
    row_gaps = [_row_gap(P[s], sol, sol.maximizer_set) for s, sol in enumerate(sols)]
    statewise_ok = tuple(g <= tolerance for g in row_gaps)

    x = (problem.utility - lambdas[:, None]) / problem.kappa
    values = problem.prior @ fused_h_qexp(x, problem.alpha)
    support = m > 0
    notes = []
    excluded: tuple = ()
    contest = values
    if np.any(np.isinf(values)):
        hit = np.flatnonzero(np.isinf(values))
        notes.append(f"condition-2 value +inf at {[problem.actions[b] for b in hit]} "
                     "(outside action at its cutoff)")
        if problem.alpha == 1.0:
            # log of a zero mass: counted as -inf in the max test
            excluded = tuple(int(b) for b in hit if not support[b])
            contest = values.copy()
            contest[list(excluded)] = -math.inf
            if excluded:
                notes.append("alpha = 1: these +inf values are treated as -inf in the max test")
    extremum = float(contest.max() if kind == "max" else contest.min())
    gap = float(_gaps(values[support], extremum).max())
    ok = all(statewise_ok) and gap <= tolerance
    return OptimalityReport(statewise_ok, values, extremum, kind, gap, ok, tolerance,
                            m, lambdas, float(max(row_gaps)), tuple(notes), excluded,
                            tuple(float(g) for g in row_gaps))


@dataclass(frozen=True)
class SupportReport:
    S_m: frozenset
    S_theta: tuple
    consideration_set: frozenset
    common_support: frozenset
    regime: Regime

    def violations(self) -> list[str]:
        """Support relations that an optimal rule must satisfy but this one does not."""
        out = []
        if self.regime is Regime.CUTOFF:
            if any(not s <= self.S_m for s in self.S_theta):
                out.append("some S_theta is not contained in S_m")
            if self.S_m != self.consideration_set:
                out.append("S_m differs from the consideration set")
        elif self.regime is Regime.FULL_SUPPORT:
            if any(s != self.S_m for s in self.S_theta):
                out.append("some S_theta differs from S_m")
        elif self.S_m != self.common_support:
            out.append("S_m differs from the common support")
        return out


def support_report(P, problem: Problem) -> SupportReport:
    P = as_choice_rule(P, (problem.n_states, problem.n_actions))
    rows = tuple(frozenset(np.flatnonzero(r > 0).tolist()) for r in P)
    m = alpha_integration(P, problem.prior, problem.alpha)
    s_m = frozenset() if m is INFINITE_INFORMATION else frozenset(np.flatnonzero(m > 0).tolist())
    return SupportReport(
        S_m=s_m,
        S_theta=rows,
        consideration_set=frozenset().union(*rows),
        common_support=frozenset.intersection(*rows),
        regime=regime_of(problem.alpha),
    )


@dataclass(frozen=True)
class CutoffEntry:
    state: int
    action: int
    utility: float
    nu: float
    relation: str  # "above", "equal" or "below" for u versus nu
    chosen: bool
    ok: bool


@dataclass(frozen=True)
class CutoffDiagnostics:
    entries: tuple
    mismatches: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _relation(u: float, nu: float) -> str:
    tol = 1e-9 * (1.0 + abs(u) + abs(nu))
    if abs(u - nu) <= tol:
        return "equal"
    return "above" if u > nu else "below"


def cutoff_diagnostics(solution) -> CutoffDiagnostics:
    """Compare each payoff with the shifted cutoff ``nu = lam + 2 kappa / (1 + alpha)``.

    alpha < -1: an action is chosen iff it is in the consideration set and its
    payoff is strictly above the cutoff.  alpha > -1: actions in the common
    support sit strictly below the cutoff; any other chosen action sits exactly
    at it, and unchosen outside actions sit at or below it.
    """
    problem: Problem = solution.problem
    if problem.alpha == -1.0:
        raise ValueError("the cutoff nu is undefined at alpha = -1")
    P = np.asarray(solution.rule)
    chosen = P > 0
    consideration = chosen.any(axis=0)
    common = chosen.all(axis=0)
    entries, bad = [], []
    for s, sol in enumerate(solution.statewise):
        for a in range(problem.n_actions):
            u = float(problem.utility[s, a])
            rel = _relation(u, sol.nu)
            if problem.alpha < -1.0:
                ok = bool(chosen[s, a]) == bool(consideration[a] and rel == "above")
            elif common[a]:
                ok = bool(chosen[s, a]) and rel == "below"
            elif chosen[s, a]:
                ok = rel == "equal"
            else:
                ok = rel != "above"
            entry = CutoffEntry(s, a, u, float(sol.nu), rel, bool(chosen[s, a]), ok)
            entries.append(entry)
            if not ok:
                bad.append(entry)
    return CutoffDiagnostics(tuple(entries), tuple(bad))


def simplex_grid(n_actions: int, step: float) -> np.ndarray:
    """All points of the probability simplex whose coordinates are multiples of ``step``."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1, got {step}")
    pts = [c for c in itertools.product(range(n + 1), repeat=n_actions - 1) if sum(c) <= n]
    counts = np.array([list(c) + [n - sum(c)] for c in pts], dtype=float)
    return counts / n


def _local_grid(center: np.ndarray, radius: float, step: float) -> np.ndarray:
    n = int(round(1.0 / step))
    lo = np.maximum(np.ceil((center - radius) * n - 1e-9), 0).astype(int)
    hi = np.minimum(np.floor((center + radius) * n + 1e-9), n).astype(int)
    ranges = [range(l, h + 1) for l, h in zip(lo[:-1], hi[:-1])]
    pts = []
    for c in itertools.product(*ranges):
        last = n - sum(c)
        if lo[-1] <= last <= hi[-1]:
            pts.append(list(c) + [last])
    return np.array(pts, dtype=float) / n


def _grid_terms(grid: np.ndarray, weight: float, alpha: float):
    """Per-state pieces of the closed-form information that depend on one row only."""
    with np.errstate(divide="ignore"):
        if alpha == -1.0:
            return weight * grid, weight * np.sum(xlogy(grid, grid), axis=1)
        if alpha == 1.0:
            return weight * np.log(grid), np.zeros(grid.shape[0])
        return weight * np.power(grid, (1.0 - alpha) / 2.0), np.zeros(grid.shape[0])


def _information_from_kernel(kernel: np.ndarray, own: np.ndarray, alpha: float) -> np.ndarray:
    """Closed form from the prior-weighted kernel sums; ``own`` carries the alpha = -1 entropy part."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if alpha == -1.0:
            value = own - np.sum(xlogy(kernel, kernel), axis=-1)
        elif alpha == 1.0:
            value = -np.log(np.sum(np.exp(kernel), axis=-1))
        else:
            r = (1.0 - alpha) / 2.0
            z = np.sum(np.power(kernel, 1.0 / r), axis=-1)
            value = 4.0 / (1.0 - alpha * alpha) * (1.0 - np.power(z, r))
    return np.maximum(value, 0.0)


def _search(grids: list[np.ndarray], problem: Problem, chunk: int = 1 << 18):
    """Best product of grid rows.  The last state's grid is broadcast against
    blocks of combinations of the others, so each row's kernel powers are
    computed once."""
    alpha, prior = problem.alpha, problem.prior
    pay = [g @ (prior[s] * problem.utility[s]) for s, g in enumerate(grids)]
    terms = [_grid_terms(g, prior[s], alpha) for s, g in enumerate(grids)]
    head_sizes = [g.shape[0] for g in grids[:-1]]
    n_head = int(np.prod(head_sizes)) if head_sizes else 1
    last_kernel, last_own = terms[-1]
    block = max(1, chunk // grids[-1].shape[0])
    best_val, best_idx = -math.inf, None
    for start in range(0, n_head, block):
        flat = np.arange(start, min(start + block, n_head))
        idx = np.unravel_index(flat, head_sizes) if head_sizes else ()
        head_kernel = sum((terms[s][0][i] for s, i in enumerate(idx)), np.zeros((flat.size, 1)))
        head_own = sum((terms[s][1][i] for s, i in enumerate(idx)), np.zeros(flat.size))
        head_pay = sum((pay[s][i] for s, i in enumerate(idx)), np.zeros(flat.size))
        info = _information_from_kernel(head_kernel[:, None, :] + last_kernel[None, :, :],
                                        head_own[:, None] + last_own[None, :], alpha)
        with np.errstate(invalid="ignore"):
            val = np.where(np.isinf(info), -np.inf,
                           head_pay[:, None] + pay[-1][None, :] - problem.kappa * info)
        k = np.unravel_index(int(np.argmax(val)), val.shape)
        if val[k] > best_val:
            best_val, best_idx = float(val[k]), (int(flat[k[0]]), int(k[1]))
    head = np.unravel_index(best_idx[0], head_sizes) if head_sizes else ()
    rows = [g[i] for g, i in zip(grids, head)] + [grids[-1][best_idx[1]]]
    return np.stack(rows), best_val


def brute_force_solve(problem: Problem, grid_step: float, refine_step: float | None = None):
    """Exhaustive search over per-state simplex grids.

    With ``refine_step`` a second pass searches the finer grid inside one coarse
    step of the incumbent.  Limited to 3 states and 3 actions.
    """
    if problem.n_actions > 3 or problem.n_states > 3:
        raise ValueError("brute_force_solve supports at most 3 states and 3 actions")
    grid = simplex_grid(problem.n_actions, grid_step)
    P, value = _search([grid] * problem.n_states, problem)
    if refine_step is not None:
        grids = [_local_grid(row, grid_step, refine_step) for row in P]
        P2, value2 = _search(grids, problem)
        if value2 >= value:
            P, value = P2, value2
    return P, value


def varphi_alpha(t, alpha: float):
    """Convex generator of the alpha-divergence as a Csiszar f-divergence."""
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("varphi_alpha requires t > 0")
    if alpha == -1.0:
        out = t * np.log(t) - t + 1.0
    elif alpha == 1.0:
        out = -np.log(t) + t - 1.0
    else:
        r = (1.0 - alpha) / 2.0
        out = 4.0 / (1.0 - alpha * alpha) * (1.0 - t ** r + r * (t - 1.0))
    return float(out) if scalar else out


def is_cofinite(alpha: float) -> bool:
    """Whether ``varphi_alpha(t) / t`` diverges as ``t`` grows, i.e. ``alpha <= -1``."""
    return alpha <= -1.0
