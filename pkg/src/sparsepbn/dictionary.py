"""Implicit dictionary of Boolean-network atoms.

An atom picks one candidate row per column of ``P``; its matrix has a single
1 in each column. The full dictionary has ``prod(counts)`` atoms and is never
materialized. Atom ids are mixed-radix numbers with column 0 as the least
significant digit.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import TOL_SUPP, StochasticMatrix

_INT64_MAX = 2**63 - 1
TOL_TIE = 1e-12


class EmptyColumnSupport(ValueError):
    def __init__(self, col: int):
        super().__init__(f"column {col} has no entry above the support threshold")
        self.col = col


class IndexOutOfRange(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Atom:
    """One constituent network: ``rows[c]`` is the image of state ``c``."""

    rows: np.ndarray
    id: int

    @property
    def choices(self) -> tuple[int, ...]:
        return tuple(int(r) for r in self.rows)

    def __eq__(self, other):
        return isinstance(other, Atom) and self.id == other.id and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        return f"Atom(id={self.id}, rows={list(self.choices)})"

    def matrix(self) -> np.ndarray:
        return atom_apply(self, 1.0, np.zeros((self.rows.size, self.rows.size)))


@dataclass(frozen=True, eq=False)
class ColumnSupportDictionary:
    """Candidate rows per column; ``values[c][k]`` is ``P[candidates[c][k], c]``.

    ``values`` only serves as a secondary tie-break key and may be omitted.
    """

    dim: int
    candidates: tuple[tuple[int, ...], ...]
    values: Optional[tuple[tuple[float, ...], ...]] = None

    def __post_init__(self):
        if len(self.candidates) != self.dim:
            raise ValueError(f"need {self.dim} candidate lists, got {len(self.candidates)}")
        for c, cands in enumerate(self.candidates):
            if not cands:
                raise EmptyColumnSupport(c)
            if list(cands) != sorted(set(cands)) or cands[0] < 0 or cands[-1] >= self.dim:
                raise ValueError(f"candidates of column {c} must be sorted, distinct rows in [0, {self.dim})")
        pos = tuple({r: k for k, r in enumerate(cands)} for cands in self.candidates)
        object.__setattr__(self, "_positions", pos)
        cand_arrays = tuple(np.asarray(c, dtype=np.intp) for c in self.candidates)
        object.__setattr__(self, "_cand_arrays", cand_arrays)
        if self.values is None:
            vals = tuple(np.zeros(len(c)) for c in self.candidates)
        else:
            vals = tuple(np.asarray(v, dtype=float) for v in self.values)
        object.__setattr__(self, "_value_arrays", vals)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.candidates)

    @property
    def atom_count(self) -> int:
        return math.prod(self.counts)

    @property
    def atom_count_log(self) -> float:
        return float(sum(math.log(c) for c in self.counts))

    @property
    def atom_count_overflows(self) -> bool:
        """True when N does not fit a signed 64-bit integer."""
        return self.atom_count > _INT64_MAX

    @property
    def nnz(self) -> int:
        return sum(self.counts)

    def encode(self, choices: Sequence[int]) -> int:
        if len(choices) != self.dim:
            raise IndexOutOfRange(f"expected {self.dim} choices, got {len(choices)}")
        idx, radix = 0, 1
        for c, row in enumerate(choices):
            try:
                digit = self._positions[c][int(row)]
            except KeyError:
                raise IndexOutOfRange(f"row {row} is not a candidate of column {c}") from None
            idx += digit * radix
            radix *= len(self.candidates[c])
        return idx

    def decode(self, atom_id: int) -> Atom:
        atom_id = int(atom_id)
        if not 0 <= atom_id < self.atom_count:
            raise IndexOutOfRange(f"atom id {atom_id} outside [0, {self.atom_count})")
        rows = np.empty(self.dim, dtype=np.intp)
        rest = atom_id
        for c, cands in enumerate(self.candidates):
            rest, digit = divmod(rest, len(cands))
            rows[c] = cands[digit]
        rows.setflags(write=False)
        return Atom(rows, atom_id)

    def atom(self, choices: Sequence[int]) -> Atom:
        rows = np.asarray(choices, dtype=np.intp).copy()
        atom_id = self.encode(rows)
        rows.setflags(write=False)
        return Atom(rows, atom_id)

    def from_digits(self, digits: Sequence[int]) -> Atom:
        """Atom from per-column candidate positions."""
        return self.atom([self.candidates[c][d] for c, d in enumerate(digits)])

    def iter_atoms(self) -> Iterator[Atom]:
        """Every atom in id order. Only sensible for small dictionaries."""
        for i in range(self.atom_count):
            yield self.decode(i)

    def digits_of(self, atom_id: int) -> tuple[int, ...]:
        out, rest = [], int(atom_id)
        for n in self.counts:
            rest, d = divmod(rest, n)
            out.append(d)
        return tuple(out)

    def random_atom_ids(self, s: int, rng: np.random.Generator) -> list[int]:
        """``s`` distinct ids, uniform over the dictionary."""
        N = self.atom_count
        if s > N:
            raise ValueError(f"cannot draw {s} distinct atoms from {N}")
        if N <= 4 * s:
            return [int(i) for i in rng.permutation(N)[:s]]
        seen: dict[int, None] = {}
        while len(seen) < s:
            digits = [int(rng.integers(n)) for n in self.counts]
            atom_id, radix = 0, 1
            for d, n in zip(digits, self.counts):
                atom_id += d * radix
                radix *= n
            seen.setdefault(atom_id, None)
        return list(seen)


def build_dictionary(P: StochasticMatrix, tau_supp: float = TOL_SUPP) -> ColumnSupportDictionary:
    a = np.asarray(P, dtype=float)
    cands, vals = [], []
    for c in range(a.shape[1]):
        rows = np.flatnonzero(a[:, c] > tau_supp)
        if not rows.size:
            raise EmptyColumnSupport(c)
        cands.append(tuple(int(i) for i in rows))
        vals.append(tuple(float(v) for v in a[rows, c]))
    return ColumnSupportDictionary(a.shape[0], tuple(cands), tuple(vals))


def atom_apply(atom: Atom, weight: float, accumulator: np.ndarray) -> np.ndarray:
    """Add ``weight * A_j`` into ``accumulator`` in place and return it."""
    accumulator[atom.rows, np.arange(atom.rows.size)] += weight
    return accumulator


def atom_score(atom: Atom, R) -> float:
    """``<vec(A_j), vec(R)>``: the sum of the entries of R the atom selects."""
    R = np.asarray(R, dtype=float)
    return float(R[atom.rows, np.arange(atom.rows.size)].sum())


def atom_dot_b(atom: Atom, P) -> float:
    return atom_score(atom, P)


def gram_entry(a: Atom, b: Atom) -> int:
    """Number of columns where two atoms pick the same row."""
    return int(np.count_nonzero(a.rows == b.rows))


def correlation_argmax(R, D: ColumnSupportDictionary, tol_tie: float = TOL_TIE) -> tuple[Atom, float]:
    """Atom with the largest correlation against the residual matrix ``R``.

    The correlation separates over columns, so each column independently
    takes its best candidate row. Rows within ``tol_tie`` of the column
    maximum count as tied; ties go to the larger entry of ``P``, then to the
    smallest row.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (D.dim, D.dim):
        raise ValueError(f"residual shape {R.shape} does not match dictionary dim {D.dim}")
    digits = []
    score = 0.0
    for c, rows in enumerate(D._cand_arrays):
        vals = R[rows, c]
        tied = np.flatnonzero(vals >= vals.max() - tol_tie)
        k = int(tied[np.argmax(D._value_arrays[c][tied])])
        digits.append(k)
        score += float(vals[k])
    return D.from_digits(digits), score


def best_atoms(R, D: ColumnSupportDictionary) -> Iterator[tuple[Atom, float]]:
    """Atoms in non-increasing order of correlation with ``R``.

    Lazy best-first enumeration over per-column rankings; taking the first
    ``t`` results costs O(t * M log(t * M)).
    """
    R = np.asarray(R, dtype=float)
    orders, values = [], []
    for c, rows in enumerate(D._cand_arrays):
        vals = R[rows, c]
        order = np.lexsort((rows, -vals))
        orders.append(order)
        values.append(vals[order])
    start = (0,) * D.dim
    heap = [(-sum(float(v[0]) for v in values), start)]
    seen = {start}
    while heap:
        neg, ranks = heapq.heappop(heap)
        digits = [int(orders[c][r]) for c, r in enumerate(ranks)]
        yield D.from_digits(digits), -neg
        for c in range(D.dim):
            r = ranks[c] + 1
            if r < len(orders[c]):
                nxt = ranks[:c] + (r,) + ranks[c + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    delta = float(values[c][r] - values[c][r - 1])
                    heapq.heappush(heap, (neg - delta, nxt))


def best_atom_excluding(R, D: ColumnSupportDictionary, excluded) -> tuple[Atom | None, float]:
    """Highest-correlation atom whose id is not in ``excluded``."""
    excluded = set(excluded)
    for atom, score in itertools.islice(best_atoms(R, D), len(excluded) + 1):
        if atom.id not in excluded:
            return atom, score
    return None, -math.inf
