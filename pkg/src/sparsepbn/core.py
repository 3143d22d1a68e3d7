"""Domain types shared by every solver: validated transition matrices,
sparse simplex-weighted solutions and stopping profiles.

Vectorization is column-major throughout: ``vec(P)[i + M*c] == P[i, c]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

TOL_COL = 1e-8
TOL_SUPP = 1e-12
TOL_WEIGHT = 1e-12
_NEG_CLAMP = 1e-14


class ValidationError(ValueError):
    """Base class for malformed input matrices."""


class NotSquare(ValidationError):
    def __init__(self, shape):
        super().__init__(f"matrix must be square, got shape {tuple(shape)}")
        self.shape = tuple(shape)


class NegativeEntry(ValidationError):
    def __init__(self, row: int, col: int, value: float):
        super().__init__(f"negative entry {value!r} at ({row}, {col})")
        self.row, self.col, self.value = row, col, value


class EntryAboveOne(ValidationError):
    def __init__(self, row: int, col: int, value: float):
        super().__init__(f"entry {value!r} at ({row}, {col}) exceeds 1")
        self.row, self.col, self.value = row, col, value


class ColumnSumViolation(ValidationError):
    def __init__(self, col: int, total: float):
        super().__init__(f"ColumnSumViolation: column {col} sums to {total!r}, expected 1")
        self.col, self.total = col, total


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """A validated column-stochastic M x M matrix. Use :func:`validate_stochastic`."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def m(self) -> int:
        return self.dim * self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def validate_stochastic(matrix, tol_col: float = TOL_COL) -> StochasticMatrix:
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotSquare(a.shape)
    bad = np.argwhere(a < -_NEG_CLAMP)
    if bad.size:
        i, c = (int(v) for v in bad[0])
        raise NegativeEntry(i, c, float(a[i, c]))
    a[a < 0] = 0.0
    bad = np.argwhere(a > 1.0 + tol_col)
    if bad.size:
        i, c = (int(v) for v in bad[0])
        raise EntryAboveOne(i, c, float(a[i, c]))
    sums = a.sum(axis=0)
    for c, s in enumerate(sums):
        if abs(s - 1.0) > tol_col:
            raise ColumnSumViolation(c, float(s))
    return StochasticMatrix(_readonly(a))


def vectorize(P) -> np.ndarray:
    """Stack the columns of ``P`` into one vector of length M**2."""
    return np.asarray(P, dtype=float).reshape(-1, order="F")


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    M = int(round(np.sqrt(v.size)))
    if M * M != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape((M, M), order="F")


def residual_norm(R) -> float:
    """Frobenius norm of a residual matrix, i.e. ``||b - Ax||_2``."""
    return float(np.linalg.norm(vectorize(R)))


@dataclass(frozen=True)
class StoppingCriteria:
    tol_res: float = 1e-8
    tol_dx: float = 1e-5
    tol_dres: Optional[float] = None
    max_iter: int = 1

    def __post_init__(self):
        for name in ("tol_res", "tol_dx"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol_dres is not None and not self.tol_dres > 0:
            raise ValueError("tol_dres must be positive when set")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")

    @classmethod
    def default(cls, P: StochasticMatrix) -> "StoppingCriteria":
        return cls(tol_res=1e-8, tol_dx=1e-5, tol_dres=None, max_iter=P.m)

    @classmethod
    def large(cls, P: StochasticMatrix) -> "StoppingCriteria":
        return cls(tol_res=1e-8, tol_dx=1e-2, tol_dres=1e-3, max_iter=P.m)

    @classmethod
    def profile(cls, name: str, P: StochasticMatrix) -> "StoppingCriteria":
        if name == "default":
            return cls.default(P)
        if name == "large":
            return cls.large(P)
        raise ValueError(f"unknown stopping profile {name!r}")


@dataclass(frozen=True, eq=False)
class SparseSolution:
    """Weights on a handful of atoms; every other atom has weight zero.

    ``support`` holds :class:`~sparsepbn.dictionary.Atom` objects. The
    all-zero starting point is represented with an empty support and
    ``feasible=False``.
    """

    support: tuple
    weights: np.ndarray
    dim: int
    counts: tuple
    feasible: bool = True

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != len(self.support):
            raise ValueError("weights and support differ in length")
        if np.any(w < -TOL_WEIGHT):
            raise ValueError(f"weight below -{TOL_WEIGHT}: {w.min()!r}")
        w[w < TOL_WEIGHT] = 0.0
        ids = [a.id for a in self.support]
        if len(set(ids)) != len(ids):
            raise ValueError("support atoms must be distinct")
        if self.feasible and abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @classmethod
    def zero(cls, dim: int, counts: Sequence[int]) -> "SparseSolution":
        return cls((), np.zeros(0), dim, tuple(counts), feasible=False)

    def __len__(self) -> int:
        return len(self.support)

    @property
    def ids(self) -> list[int]:
        return [a.id for a in self.support]

    def as_dict(self) -> dict[int, float]:
        return {a.id: float(w) for a, w in zip(self.support, self.weights)}

    def reconstruct(self) -> np.ndarray:
        """The mixture matrix ``sum_j x_j A_j``."""
        out = np.zeros((self.dim, self.dim))
        cols = np.arange(self.dim)
        for atom, w in zip(self.support, self.weights):
            out[atom.rows, cols] += w
        return out

    def residual(self, P) -> np.ndarray:
        return np.asarray(P, dtype=float) - self.reconstruct()

    def l1_distance(self, other: "SparseSolution") -> float:
        """``||x - y||_1`` over the union of the two supports."""
        a, b = self.as_dict(), other.as_dict()
        return float(sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b)))
