"""Benchmark transition matrices shipped with the package.

Keys: ``p1``, ``p2`` (4 states), ``p3a``/``p3b`` (8 states, perturbation
0.01/0.02), ``p4`` (block-diagonal copy of ``p2``), ``p5`` and ``p6``.
"""

from __future__ import annotations

import numpy as np

from .core import StochasticMatrix, validate_stochastic

P1 = [
    [0.1, 0.3, 0.5, 0.6],
    [0.0, 0.7, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.0],
    [0.9, 0.0, 0.0, 0.4],
]

P2 = [
    [0.1, 0.3, 0.2, 0.1],
    [0.2, 0.3, 0.2, 0.0],
    [0.0, 0.0, 0.6, 0.4],
    [0.7, 0.4, 0.0, 0.5],
]


def p3(eps: float) -> list[list[float]]:
    """Perturbed 3-gene network. Column 4 keeps mass only on rows 2 and 3."""
    e, q = eps, 1.0 - eps
    return [
        [q,   0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, q,   0.0, 0.0, 0.0],
        [e,   e,   e,   0.0, e,   0.0, 0.0, e],
        [0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.5, 0.0],
        [0.0, q,   q,   0.0, 0.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, q],
    ]


def p4() -> np.ndarray:
    out = np.zeros((8, 8))
    out[:4, :4] = P2
    out[4:, 4:] = P2
    return out


P5 = [
    [0.12, 0.00, 0.60, 0.42, 0.00, 0.00, 0.00, 0.00],
    [0.28, 0.00, 0.00, 0.18, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.40, 0.00, 0.00, 0.40, 0.18, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.42, 0.00, 0.60],
    [0.18, 0.00, 0.40, 0.28, 0.00, 0.00, 0.00, 0.00],
    [0.42, 0.00, 0.00, 0.12, 0.00, 0.00, 0.00, 0.00],
    [0.00, 0.60, 0.00, 0.00, 0.60, 0.12, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.00, 0.00, 0.28, 1.00, 0.40],
]

# Columns 4 and 7 sum to 1.01 as published; kept verbatim.
P6 = [
    [0.57, 0.00, 0.10, 0.00, 0.00, 0.04, 0.00, 0.00],
    [0.14, 0.31, 0.00, 0.50, 0.13, 0.13, 0.33, 0.06],
    [0.00, 0.08, 0.40, 0.25, 0.25, 0.00, 0.67, 0.00],
    [0.00, 0.15, 0.00, 0.00, 0.00, 0.08, 0.00, 0.00],
    [0.00, 0.15, 0.30, 0.00, 0.00, 0.13, 0.00, 0.00],
    [0.29, 0.31, 0.20, 0.00, 0.25, 0.29, 0.00, 0.39],
    [0.00, 0.00, 0.00, 0.00, 0.38, 0.00, 0.00, 0.00],
    [0.00, 0.00, 0.00, 0.25, 0.00, 0.33, 0.00, 0.56],
]

P6_TOL_COL = 0.011

_RAW = {
    "p1": (lambda: P1, 1e-8),
    "p2": (lambda: P2, 1e-8),
    "p3a": (lambda: p3(0.01), 1e-8),
    "p3b": (lambda: p3(0.02), 1e-8),
    "p4": (p4, 1e-8),
    "p5": (lambda: P5, 1e-8),
    "p6": (lambda: P6, P6_TOL_COL),
}

NAMES = tuple(_RAW)


def raw_example(name: str) -> np.ndarray:
    try:
        make, _ = _RAW[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(NAMES)}") from None
    return np.array(make(), dtype=float)


def load_example(name: str) -> StochasticMatrix:
    make, tol = _RAW[name]
    return validate_stochastic(make(), tol_col=tol)
