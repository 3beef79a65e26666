"""Alpha-divergence, alpha-integration and the closed-form alpha-information."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from alphari.core_math import INF, alpha_mean
from alphari.problem import as_choice_rule, as_distribution


class _InfiniteInformation:
    """Marker returned by :func:`alpha_integration` when no finite minimizer exists.

    This happens for ``alpha >= 1`` when the rows of the choice rule have no
    action in common, so every reference distribution has infinite cost.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE_INFORMATION"

    def __bool__(self):
        return False


INFINITE_INFORMATION = _InfiniteInformation()


@dataclass(frozen=True)
class SupportSets:
    union_support: frozenset
    common_support: frozenset


def support_sets(P) -> SupportSets:
    P = np.asarray(P)
    pos = P > 0
    return SupportSets(
        union_support=frozenset(np.flatnonzero(pos.any(axis=0)).tolist()),
        common_support=frozenset(np.flatnonzero(pos.all(axis=0)).tolist()),
    )


def alpha_divergence(p, m, alpha: float) -> float:
    """Amari alpha-divergence ``D_alpha[p : m]``.

    KL(p || m) at alpha = -1 and KL(m || p) at alpha = 1.  Returns ``inf``
    whenever the zero conventions force it.
    """
    p = np.asarray(p, dtype=float)
    m = np.asarray(m, dtype=float)
    if alpha == -1.0:
        return _kl(p, m)
    if alpha == 1.0:
        return _kl(m, p)
    ep, em = (1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0
    both = (p > 0) & (m > 0)
    terms = np.zeros(p.shape)
    terms[both] = np.power(p[both], ep) * np.power(m[both], em)
    # one side zero: 0 ** negative = inf against a positive factor, otherwise 0
    if (ep < 0 and np.any((p == 0) & (m > 0))) or (em < 0 and np.any((m == 0) & (p > 0))):
        return INF
    total = terms.sum()
    if math.isinf(total):
        return INF
    value = 4.0 / (1.0 - alpha * alpha) * (1.0 - total)
    return max(value, 0.0)


def _kl(p: np.ndarray, m: np.ndarray) -> float:
    if np.any((p > 0) & (m == 0)):
        return INF
    support = p > 0
    value = float(np.sum(xlogy(p[support], p[support]) - xlogy(p[support], m[support])))
    return max(value, 0.0)


def _alpha_means(P: np.ndarray, prior: np.ndarray, alpha: float):
    """Unnormalized alpha-means per action, zero off the relevant support.

    Returns ``None`` for the infinite-information case.
    """
    sets = support_sets(P)
    active = sets.union_support if alpha < 1 else sets.common_support
    if not active:
        return None
    idx = np.array(sorted(active))
    means = np.zeros(P.shape[1])
    means[idx] = alpha_mean(P[:, idx], prior, alpha, axis=0)
    return means


def integrate(P: np.ndarray, prior: np.ndarray, alpha: float):
    """Alpha-integration and alpha-information of a validated rule in one pass.

    Returns ``(m, information)``; ``m`` is :data:`INFINITE_INFORMATION` when the
    information is infinite.
    """
    means = _alpha_means(P, prior, alpha)
    if means is None:
        return INFINITE_INFORMATION, INF
    z = float(means.sum())
    m = means / z
    if alpha == -1.0:
        cols = m > 0
        Pu = P[:, cols]
        ratio = xlogy(Pu, Pu) - xlogy(Pu, np.broadcast_to(m[cols], Pu.shape))
        info = float(prior @ ratio.sum(axis=1))
    elif alpha == 1.0:
        info = -math.log(z)
    else:
        info = 4.0 / (1.0 - alpha * alpha) * (1.0 - z ** ((1.0 - alpha) / 2.0))
    return m, max(info, 0.0)


def alpha_integration(P, prior, alpha: float):
    """Minimizer over reference distributions of the prior-weighted divergence.

    Returns the normalized alpha-means of the columns of ``P`` restricted to
    the union support (alpha < 1) or the common support (alpha >= 1), or
    :data:`INFINITE_INFORMATION` when the common support is empty.
    """
    P = as_choice_rule(P)
    prior = as_distribution(prior, P.shape[0], "prior")
    return integrate(P, prior, alpha)[0]


def alpha_information(P, prior, alpha: float) -> float:
    """Closed-form alpha-information of the choice rule ``P``.

    At alpha = -1 this is the mutual information between state and action; at
    alpha = 1 it is minus the log of the total geometric-mean mass over the
    common support; otherwise ``4 / (1 - alpha^2) * (1 - Z ** ((1 - alpha) / 2))``
    with ``Z`` the total alpha-mean mass.
    """
    P = as_choice_rule(P)
    prior = as_distribution(prior, P.shape[0], "prior")
    return integrate(P, prior, alpha)[1]


def weighted_divergence(P, m, prior, alpha: float) -> float:
    """``sum_s prior[s] * D_alpha[P[s] : m]``."""
    P = np.asarray(P, dtype=float)
    prior = np.asarray(prior, dtype=float)
    total = 0.0
    for w, row in zip(prior, P):
        d = alpha_divergence(row, m, alpha)
        if math.isinf(d):
            return INF
        total += w * d
    return total


def batch_alpha_information(P, prior, alpha: float) -> np.ndarray:
    """Closed-form alpha-information for a stack of choice rules.

    ``P`` has shape ``(..., n_states, n_actions)``.  Support restrictions are
    carried by extended arithmetic instead of explicit set logic: zero entries
    map through the mean kernel to 0 (alpha < 1) or drop the action
    (alpha >= 1), and an empty common support yields ``inf``.
    """
    P = np.asarray(P, dtype=float)
    prior = np.asarray(prior, dtype=float)
    w = prior[:, None]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if alpha == -1.0:
            marginal = np.sum(w * P, axis=-2, keepdims=True)
            terms = xlogy(P, P) - xlogy(P, np.broadcast_to(marginal, P.shape))
            return np.maximum(np.sum(w * terms, axis=(-2, -1)), 0.0)
        if alpha == 1.0:
            kernel = np.sum(w * np.log(P), axis=-2)
            z = np.sum(np.exp(kernel), axis=-1)
            return np.maximum(-np.log(z), 0.0)
        r = (1.0 - alpha) / 2.0
        kernel = np.sum(w * np.power(P, r), axis=-2)
        z = np.sum(np.power(kernel, 1.0 / r), axis=-1)
        value = 4.0 / (1.0 - alpha * alpha) * (1.0 - np.power(z, r))
    return np.maximum(value, 0.0)
