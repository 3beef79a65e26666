"""Problem instances and validation of choice rules and reference distributions."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from alphari.core_math import AlphaParams

SUM_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Problem:
    """A finite information acquisition problem.

    ``utility[s, a]`` is the payoff of action ``a`` in state ``s``.
    """

    prior: np.ndarray
    utility: np.ndarray
    params: AlphaParams
    states: tuple = field(default=())
    actions: tuple = field(default=())

    def __post_init__(self):
        prior = _frozen(self.prior)
        utility = _frozen(self.utility)
        if prior.ndim != 1 or prior.size == 0:
            raise ValueError("prior must be a nonempty vector")
        if np.any(~np.isfinite(prior)) or np.any(prior <= 0):
            raise ValueError("prior must be strictly positive")
        if abs(prior.sum() - 1.0) > 1e-9:
            raise ValueError(f"prior must sum to 1, sums to {prior.sum()!r}")
        if utility.ndim != 2 or utility.shape[0] != prior.size or utility.shape[1] == 0:
            raise ValueError(
                f"utility must be |states| x |actions|, got shape {utility.shape} "
                f"for {prior.size} states"
            )
        if not np.all(np.isfinite(utility)):
            raise ValueError("utility must be finite")
        states = tuple(self.states) or tuple(str(i + 1) for i in range(prior.size))
        actions = tuple(self.actions) or tuple(f"a{j}" for j in range(utility.shape[1]))
        if len(states) != prior.size or len(actions) != utility.shape[1]:
            raise ValueError("label counts do not match the utility matrix")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "utility", utility)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    @classmethod
    def create(cls, prior, utility, alpha: float, kappa: float = 1.0,
               states: Sequence[str] = (), actions: Sequence[str] = ()) -> "Problem":
        return cls(prior, utility, AlphaParams(float(alpha), float(kappa)),
                   tuple(states), tuple(actions))

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def kappa(self) -> float:
        return self.params.kappa

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def n_states(self) -> int:
        return self.prior.size

    @property
    def n_actions(self) -> int:
        return self.utility.shape[1]

    def with_alpha(self, alpha: float) -> "Problem":
        return dataclasses.replace(self, params=AlphaParams(float(alpha), self.kappa))


def as_distribution(p, n: int | None = None, name: str = "distribution") -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise ValueError(f"{name} must be a vector of length {n}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > SUM_TOL * max(1, p.size):
        raise ValueError(f"{name} must sum to 1, sums to {p.sum()!r}")
    return p


def as_choice_rule(P, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Validate a stochastic choice rule (one distribution over actions per state)."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or (shape is not None and P.shape != tuple(shape)):
        raise ValueError(f"choice rule must have shape {shape}, got {P.shape}")
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise ValueError("choice rule has negative or non-finite entries")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > SUM_TOL * max(1, P.shape[1])):
        raise ValueError("every row of a choice rule must sum to 1")
    return P
