import itertools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def explicit_atoms(candidates):
    """Every atom as a tuple of rows, in id order (column 0 varies fastest)."""
    for combo in itertools.product(*reversed(candidates)):
        yield tuple(reversed(combo))


def explicit_A(candidates):
    """Materialized dictionary: one column vec(A_j) per atom."""
    M = len(candidates)
    cols = []
    for rows in explicit_atoms(candidates):
        A = np.zeros((M, M))
        A[list(rows), range(M)] = 1.0
        cols.append(A.reshape(-1, order="F"))
    return np.array(cols).T


def random_stochastic(rng, M, per_col):
    P = np.zeros((M, M))
    for c in range(M):
        rows = rng.choice(M, size=per_col, replace=False)
        P[rows, c] = rng.dirichlet(np.ones(per_col))
    return P


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
