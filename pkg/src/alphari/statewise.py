"""Per-state best response to a fixed reference distribution.

For a reference ``m`` the optimal row in state ``s`` is ``m(a) * q_exp((u(a, s) - lam) / kappa)``
on the support of ``m``, where ``lam`` normalizes the row.  When ``alpha > -1`` and ``m``
leaves some actions out, the row may instead be pinned at the zero-``m`` cutoff and the
missing mass handed to the best outside actions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from alphari.core_math import _logsumexp, q_exp
from alphari.information import alpha_divergence
from alphari.problem import Problem

TIE_RULES = ("uniform", "first-index", "single-required")


class BracketError(RuntimeError):
    """The normalization root could not be bracketed."""


class Branch(str, enum.Enum):
    CASE1 = "Case1"
    CASE2A = "Case2a"
    CASE2B = "Case2b"


@dataclass(frozen=True, eq=False)
class StatewiseSolution:
    row: np.ndarray
    lam: float
    nu: float | None
    branch: Branch
    maximizer_set: tuple
    residual_mass: float
    lambda_bar: float
    lambda_bar_zero: float | None


SCALAR_LIMIT = 16
# floats on each side of the brentq result checked for a smaller residual
LAMBDA_SCAN_ULPS = 8
# below this q-exponential base the top entries come from the normalization
NEAR_POLE_BASE = 1e-4


def _mass_function(u: np.ndarray, w: np.ndarray, kappa: float, q: float):
    """``lam -> sum_a w(a) q_exp((u(a) - lam) / kappa)`` tuned for the support size."""
    if u.size > SCALAR_LIMIT:
        return lambda lam: float(np.dot(w, q_exp((u - lam) / kappa, q)))
    pairs = list(zip(u.tolist(), w.tolist()))
    c = 1.0 - q
    inv = 1.0 / c
    blowup = q > 1.0

    def mass(lam: float) -> float:
        total = 0.0
        for ua, wa in pairs:
            base = 1.0 + c * (ua - lam) / kappa
            if base > 0:
                try:
                    total += wa * base ** inv
                except OverflowError:
                    return math.inf
            elif blowup:
                return math.inf
        return total

    return mass


def solve_lambda_bar(theta: int, m, problem: Problem) -> float:
    """Unique ``lam`` with ``sum_{m(a) > 0} m(a) q_exp((u(a, theta) - lam) / kappa) = 1``."""
    m = np.asarray(m, dtype=float)
    support = m > 0
    if not support.any():
        raise ValueError("reference distribution has empty support")
    u = problem.utility[theta, support]
    w = m[support]
    kappa, q, alpha = problem.kappa, problem.q, problem.alpha
    if q == 1.0:
        return float(kappa * _logsumexp(u / kappa + np.log(w)))

    mass = _mass_function(u, w, kappa, q)
    top = float(u.max())
    scale = 1.0 + float(np.max(np.abs(problem.utility[theta])))
    hi = top
    step = kappa
    while mass(hi) > 1.0:
        hi = top + step
        step *= 2.0
        if not math.isfinite(hi):
            raise BracketError("could not find an upper bracket")
    if mass(hi) == 1.0:
        return hi

    if alpha > -1.0:
        # mass is +inf at and below this point
        pole = top - 2.0 * kappa / (1.0 + alpha)
        eps = 1e-12 * scale
        lo = pole + eps
        while mass(lo) <= 1.0:
            # halve: the root can sit a few ulps above the pole
            eps *= 0.5
            lo = pole + eps
            if lo == pole:
                # the root is closer to the pole than float spacing resolves;
                # statewise_solve hands the missing mass to the top actions
                return float(np.nextafter(pole, np.inf))
    else:
        step = kappa
        lo = top - step
        while mass(lo) <= 1.0:
            step *= 2.0
            lo = top - step
            if not math.isfinite(lo):
                raise BracketError("could not find a lower bracket")

    f = lambda lam: mass(lam) - 1.0
    lam = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq stops within a few ulps; keep the nearby float with the smallest residual
    cands = [lam]
    for direction in (-np.inf, np.inf):
        x = lam
        for _ in range(LAMBDA_SCAN_ULPS):
            x = np.nextafter(x, direction)
            cands.append(x)
    return float(min(cands, key=lambda x: abs(f(x)) if lo <= x <= hi else np.inf))


def lambda_bar_zero(theta: int, m, problem: Problem) -> float | None:
    """Cutoff ``max_{m(a)=0} u(a, theta) - 2 kappa / (1 + alpha)``; None when undefined."""
    m = np.asarray(m, dtype=float)
    outside = m == 0
    if problem.alpha <= -1.0 or not outside.any():
        return None
    return float(problem.utility[theta, outside].max() - 2.0 * problem.kappa / (1.0 + problem.alpha))


def _row_at(lam: float, theta: int, m: np.ndarray, problem: Problem) -> np.ndarray:
    support = m > 0
    row = np.zeros_like(m)
    row[support] = m[support] * q_exp((problem.utility[theta, support] - lam) / problem.kappa, problem.q)
    return row


def _near_pole(lam: float, theta: int, m: np.ndarray, problem: Problem) -> bool:
    """Whether one ulp of ``lam`` moves the top actions' mass by more than rounding noise.

    Close to the pole the top entries scale like a negative power of
    ``lam - pole``, so they are better recovered from the normalization.
    """
    if problem.alpha <= -1.0:
        return False
    top = float(problem.utility[theta, m > 0].max())
    base = 1.0 + (1.0 - problem.q) * (top - lam) / problem.kappa
    return base < NEAR_POLE_BASE


def _saturate(row: np.ndarray, theta: int, m: np.ndarray, problem: Problem) -> np.ndarray:
    """Give the top-payoff actions of ``supp m`` whatever mass the others leave."""
    support = m > 0
    u = problem.utility[theta]
    top = support & (u == u[support].max())
    row = np.where(top, 0.0, row)
    # normalize the weights first: m may hold subnormal entries
    row[top] = (1.0 - row.sum()) * (m[top] / m[top].sum())
    return row


def _spread(residual: float, maximizers: np.ndarray, n: int, tie_rule: str) -> np.ndarray:
    extra = np.zeros(n)
    if tie_rule == "uniform":
        extra[maximizers] = residual / maximizers.size
    elif tie_rule == "first-index":
        extra[maximizers[0]] = residual
    elif tie_rule == "single-required":
        if maximizers.size != 1:
            raise ValueError(f"tie among outside maximizers {maximizers.tolist()} "
                             "with tie_rule='single-required'")
        extra[maximizers[0]] = residual
    else:
        raise ValueError(f"unknown tie_rule {tie_rule!r}; expected one of {TIE_RULES}")
    return extra


def statewise_solve(theta: int, m, problem: Problem, tie_rule: str = "uniform") -> StatewiseSolution:
    """Maximize ``sum_a p(a) u(a, theta) - kappa * D_alpha[p : m]`` over the simplex."""
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie_rule {tie_rule!r}; expected one of {TIE_RULES}")
    m = np.asarray(m, dtype=float)
    alpha, kappa = problem.alpha, problem.kappa
    lam_bar = solve_lambda_bar(theta, m, problem)
    lam0 = lambda_bar_zero(theta, m, problem)

    maximizers: tuple = ()
    residual = 0.0
    if lam0 is None or lam_bar >= lam0:
        branch = Branch.CASE1 if lam0 is None else Branch.CASE2A
        lam = lam_bar
        row = _row_at(lam, theta, m, problem)
        total = row.sum()
        if not math.isfinite(total) or total < 1.0 - 1e-9 or _near_pole(lam, theta, m, problem):
            row = _saturate(row, theta, m, problem)
        else:
            row /= total
    else:
        branch = Branch.CASE2B
        lam = lam0
        row = _row_at(lam, theta, m, problem)
        inside = row.sum()
        if inside > 1.0:
            # only reachable through rounding when lam_bar and lam0 nearly coincide
            row /= inside
            inside = 1.0
        residual = 1.0 - inside
        u = problem.utility[theta]
        outside = np.flatnonzero(m == 0)
        best = u[outside].max()
        idx = outside[u[outside] == best]
        maximizers = tuple(idx.tolist())
        row = row + _spread(residual, idx, m.size, tie_rule)

    nu = None if alpha == -1.0 else lam + 2.0 * kappa / (1.0 + alpha)
    row.setflags(write=False)
    return StatewiseSolution(row, float(lam), nu, branch, maximizers, float(residual),
                             float(lam_bar), lam0)


def statewise_objective(row, m, theta: int, problem: Problem) -> float:
    """Expected payoff in ``theta`` minus ``kappa`` times the divergence from ``m``."""
    row = np.asarray(row, dtype=float)
    d = alpha_divergence(row, m, problem.alpha)
    if math.isinf(d):
        return -math.inf
    return float(row @ problem.utility[theta]) - problem.kappa * d
