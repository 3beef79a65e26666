import numpy as np
import pytest

from alphari import Problem

EXAMPLE1_PRIOR = (0.2, 0.8)
EXAMPLE1_UTILITY = ((2.0, 1.25, 0.0), (-1.0, -0.25, 0.0))
ALPHA_GRID = (-6.0, -3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0)

# criterion number -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def example1(alpha: float = 3.0, kappa: float = 1.0) -> Problem:
    return Problem.create(EXAMPLE1_PRIOR, EXAMPLE1_UTILITY, alpha, kappa,
                          states=("1", "2"), actions=("a", "b", "c"))


def random_problem(rng: np.random.Generator, alpha: float, max_states: int = 4, max_actions: int = 4,
                   n_states: int | None = None, n_actions: int | None = None) -> Problem:
    S = n_states or int(rng.integers(1, max_states + 1))
    A = n_actions or int(rng.integers(2, max_actions + 1))
    prior = rng.dirichlet(np.ones(S))
    prior = np.maximum(prior, 1e-3)
    prior /= prior.sum()
    scale = rng.choice([0.3, 1.0, 3.0])
    return Problem.create(prior, rng.normal(size=(S, A)) * scale, alpha, float(rng.choice([0.5, 1.0, 2.0])))


def random_rule(rng: np.random.Generator, S: int, A: int, zeros: bool = False) -> np.ndarray:
    P = rng.dirichlet(np.ones(A), size=S)
    if zeros:
        P[rng.random((S, A)) < 0.3] = 0.0
        for row in P:
            if row.sum() == 0:
                row[rng.integers(A)] = 1.0
        P /= P.sum(axis=1, keepdims=True)
    return P


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
