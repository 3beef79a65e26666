"""Deformed exponentials, the alpha-mean kernel and related primitives.

Extended reals are plain floats: ``math.inf`` stands for +infinity and the
conventions ``0 * inf = 0``, ``1 / 0 = inf`` and ``-log 0 = inf`` are applied
explicitly inside each function rather than left to IEEE arithmetic.

All functions accept scalars or array-likes.  Scalar input gives a Python
float back, array input gives an ``ndarray`` of the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf


class DomainError(ValueError):
    """An argument lies outside the domain of a primitive."""


def _out(value: np.ndarray, scalar: bool):
    if scalar:
        return float(value)
    return value


def q_of_alpha(alpha: float) -> float:
    """Deformation index paired with ``alpha``: ``(3 + alpha) / 2``."""
    return (3.0 + alpha) / 2.0


@dataclass(frozen=True)
class AlphaParams:
    """Divergence order ``alpha`` and information unit cost ``kappa``."""

    alpha: float
    kappa: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be a positive finite real, got {self.kappa}")

    @property
    def q(self) -> float:
        return q_of_alpha(self.alpha)


def q_exp(x, q: float):
    """q-exponential ``[1 + (1 - q) x]_+ ** (1 / (1 - q))``; ``exp(x)`` at q = 1.

    The sign test on the base is exact.  A non-positive base maps to ``inf``
    when ``q > 1`` (negative power of zero) and to ``0`` when ``q < 1``.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if q == 1.0:
        with np.errstate(over="ignore"):
            return _out(np.exp(x), scalar)
    base = 1.0 + (1.0 - q) * x
    pos = base > 0
    with np.errstate(over="ignore", divide="ignore"):
        out = np.where(pos, np.power(np.where(pos, base, 1.0), 1.0 / (1.0 - q)),
                       INF if q > 1.0 else 0.0)
    return _out(out, scalar)


def h_alpha(t, alpha: float, extended: bool = False):
    """Kernel of the alpha-mean: ``t ** ((1 - alpha) / 2)``, or ``log t`` at alpha = 1.

    For ``alpha >= 1`` a zero argument raises :class:`DomainError` unless
    ``extended`` is set, in which case ``h(0)`` is ``-inf`` (alpha = 1) or
    ``inf`` (alpha > 1).
    """
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("h_alpha requires t >= 0")
    if alpha >= 1.0 and np.any(t == 0) and not extended:
        raise DomainError(f"h_alpha(0) is unbounded for alpha={alpha}; pass extended=True")
    with np.errstate(divide="ignore", over="ignore"):
        if alpha == 1.0:
            out = np.log(t)
        else:
            out = np.power(t, (1.0 - alpha) / 2.0)
    return _out(out, scalar)


def h_alpha_inv(s, alpha: float):
    """Inverse of :func:`h_alpha`."""
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if np.any(np.isnan(s)):
        raise DomainError("h_alpha_inv got NaN")
    if alpha == 1.0:
        with np.errstate(over="ignore"):
            return _out(np.exp(s), scalar)
    if np.any(s < 0):
        raise DomainError(f"h_alpha_inv: negative value outside the range of h for alpha={alpha}")
    with np.errstate(divide="ignore", over="ignore"):
        out = np.power(s, 2.0 / (1.0 - alpha))
    return _out(out, scalar)


def fused_h_qexp(x, alpha: float):
    """Evaluate ``h_alpha(q_exp(x, q_alpha))`` in one algebraic step.

    Away from alpha = +-1 this is ``[1 - (1 + alpha) x / 2]_+ ** (-(1 - alpha) / (1 + alpha))``
    with a zero base sent to ``inf`` or ``0`` according to the sign of the
    exponent.  At alpha = -1 it is ``exp(x)``; at alpha = 1 it is
    ``-log[1 - x]_+`` with ``-log 0 = inf``.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if alpha == -1.0:
        with np.errstate(over="ignore"):
            return _out(np.exp(x), scalar)
    if alpha == 1.0:
        base = 1.0 - x
        pos = base > 0
        out = np.where(pos, -np.log(np.where(pos, base, 1.0)), INF)
        return _out(out, scalar)
    base = 1.0 - (1.0 + alpha) * x / 2.0
    expo = -(1.0 - alpha) / (1.0 + alpha)
    pos = base > 0
    with np.errstate(over="ignore", divide="ignore"):
        out = np.where(pos, np.power(np.where(pos, base, 1.0), expo), INF if expo < 0 else 0.0)
    return _out(out, scalar)


def _logsumexp(v: np.ndarray) -> np.ndarray:
    """Log-sum-exp over the last axis; an all ``-inf`` slice gives ``-inf``."""
    top = np.max(v, axis=-1)
    shift = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return shift + np.log(np.sum(np.exp(v - shift[..., None]), axis=-1))


def _check_prior(prior: np.ndarray) -> None:
    if prior.ndim != 1 or np.any(prior <= 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise DomainError("prior must be a strictly positive vector summing to 1")


def alpha_mean(x, prior, alpha: float, axis: int = -1):
    """Weighted alpha-mean ``h^{-1}(sum_i prior_i h(x_i))`` along ``axis``.

    Zero components are allowed for ``alpha < 1`` only.  Evaluation is done in
    the log domain so large ``|alpha|`` neither under- nor overflows.
    """
    x = np.asarray(x, dtype=float)
    prior = np.asarray(prior, dtype=float)
    _check_prior(prior)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("alpha_mean requires nonnegative components")
    if alpha >= 1.0 and np.any(x == 0):
        raise DomainError(f"alpha_mean: zero component with alpha={alpha} >= 1")
    x = np.moveaxis(x, axis, -1)
    if x.shape[-1] != prior.shape[0]:
        raise DomainError("alpha_mean: length mismatch between x and prior")
    if alpha == -1.0:
        out = x @ prior
    else:
        with np.errstate(divide="ignore"):
            logx = np.log(x)
        if alpha == 1.0:
            out = np.exp(logx @ prior)
        else:
            r = (1.0 - alpha) / 2.0
            t = r * logx
            with np.errstate(invalid="ignore"):
                small = np.all(np.abs(t) < 1.0, axis=-1)
            if np.all(small):
                # near alpha = 1 dividing a plain log-sum-exp by r loses eps / r
                log_mean = np.log1p((prior.sum() - 1.0) + np.expm1(t) @ prior)
            else:
                log_mean = _logsumexp(t + np.log(prior))
            out = np.exp(log_mean / r)
    return float(out) if np.ndim(out) == 0 else out
