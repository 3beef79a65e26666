"""Rational inattention with alpha-divergence information costs."""

from alphari.core_math import (
    INF,
    AlphaParams,
    DomainError,
    alpha_mean,
    fused_h_qexp,
    h_alpha,
    h_alpha_inv,
    q_exp,
    q_of_alpha,
)
from alphari.information import (
    INFINITE_INFORMATION,
    SupportSets,
    alpha_divergence,
    alpha_information,
    alpha_integration,
    support_sets,
    weighted_divergence,
)
from alphari.problem import Problem
from alphari.solver import Solution, SolveConfig, SweepEntry, expected_payoff, objective, solve, sweep
from alphari.statewise import Branch, StatewiseSolution, statewise_objective, statewise_solve
from alphari.verify import (
    CutoffDiagnostics,
    OptimalityReport,
    Regime,
    SupportReport,
    brute_force_solve,
    check_optimality,
    cutoff_diagnostics,
    is_cofinite,
    regime_of,
    support_report,
    varphi_alpha,
)

__all__ = [
    "INF", "AlphaParams", "DomainError", "alpha_mean", "fused_h_qexp", "h_alpha", "h_alpha_inv",
    "q_exp", "q_of_alpha",
    "INFINITE_INFORMATION", "SupportSets", "alpha_divergence", "alpha_information",
    "alpha_integration", "support_sets", "weighted_divergence",
    "Problem",
    "Solution", "SolveConfig", "SweepEntry", "expected_payoff", "objective", "solve", "sweep",
    "Branch", "StatewiseSolution", "statewise_objective", "statewise_solve",
    "CutoffDiagnostics", "OptimalityReport", "Regime", "SupportReport", "brute_force_solve",
    "check_optimality", "cutoff_diagnostics", "is_cofinite", "regime_of", "support_report",
    "varphi_alpha",
]
