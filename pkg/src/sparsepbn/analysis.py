"""Reporting and diagnostics for pursuit runs.

* :func:`res_sum_table` - residual and cumulative mass of the ``j`` heaviest atoms.
* :func:`recovery_condition_check` - does the target support out-correlate every
  other atom at the given points?
* :func:`plant_instance` - random mixtures with a known answer.
* :func:`decrease_audit` - re-check the per-step residual decrease bound on a trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import SparseSolution, StochasticMatrix, residual_norm, validate_stochastic
from .dictionary import (
    Atom,
    ColumnSupportDictionary,
    atom_apply,
    best_atom_excluding,
    build_dictionary,
)
from .momp import RunTrace
from .simplexls import build_gram

EXHAUSTIVE_LIMIT = 10_000
TOL_MARGIN = 1e-10
TOL_DEGENERATE = 1e-12


class PatternTooSmall(ValueError):
    pass


class SupportTooLargeForExactComplement(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ResSumRow:
    j: int
    res: float
    sum: float
    atom_id: int


@dataclass(frozen=True)
class ResSumTable:
    rows: tuple[ResSumRow, ...]
    order: tuple[int, ...]

    def res(self) -> list[float]:
        return [r.res for r in self.rows]

    def sums(self) -> list[float]:
        return [r.sum for r in self.rows]


def res_sum_table(x: SparseSolution, P, j_max: Optional[int] = None) -> ResSumTable:
    """Residual ``||b - A_top(j) x_top(j)||`` and mass of the ``j`` largest weights.

    Weights are used as they are (no renormalization). Weights equal to
    within 1e-12 are ordered by descending atom id.
    """
    Pm = np.asarray(P, dtype=float)
    n = len(x) if j_max is None else min(int(j_max), len(x))
    order = sorted(range(len(x)), key=lambda i: (-round(float(x.weights[i]), 12), -x.support[i].id))
    acc = np.zeros_like(Pm)
    total = 0.0
    rows = []
    for j, i in enumerate(order[:n], start=1):
        atom_apply(x.support[i], x.weights[i], acc)
        total += float(x.weights[i])
        rows.append(ResSumRow(j, residual_norm(Pm - acc), total, x.support[i].id))
    return ResSumTable(tuple(rows), tuple(order[:n]))


@dataclass(frozen=True)
class ProbeResult:
    in_support_max: float
    out_support_max: float
    margin: float
    passed: bool
    degenerate: bool
    residual: float
    exact: bool = True


@dataclass(frozen=True)
class RecoveryReport:
    probes: tuple[ProbeResult, ...]
    rank: int
    support_size: int

    @property
    def full_rank(self) -> bool:
        return self.rank == self.support_size

    @property
    def all_passed(self) -> bool:
        return all(p.passed for p in self.probes)


def _all_scores(R: np.ndarray, D: ColumnSupportDictionary) -> np.ndarray:
    """Correlation of every atom, indexed by id (small dictionaries only)."""
    scores = np.zeros(1)
    # column 0 is the least significant digit, so it varies fastest
    for c in reversed(range(D.dim)):
        vals = R[np.asarray(D.candidates[c]), c]
        scores = (scores[:, None] + vals[None, :]).reshape(-1)
    return scores


def recovery_condition_check(
    P,
    target_support: Sequence[Atom],
    probe_points: Sequence[SparseSolution],
    dictionary: Optional[ColumnSupportDictionary] = None,
) -> RecoveryReport:
    """Compare the best in-support and out-of-support correlations at each probe.

    A probe passes when the in-support maximum exceeds the out-of-support
    maximum by more than ``TOL_MARGIN``; a probe whose residual vanishes is
    a degenerate pass. The complement maximum is exact: by enumeration for
    small dictionaries, otherwise by best-first search over atoms ranked by
    correlation.
    """
    Pm = np.asarray(P, dtype=float)
    D = dictionary if dictionary is not None else build_dictionary(Pm)
    target = list(target_support)
    ids = {a.id for a in target}
    if len(ids) != len(target):
        raise ValueError("target support atoms must be distinct")
    rank = int(np.linalg.matrix_rank(build_gram(target, Pm).G)) if target else 0

    probes = []
    for x in probe_points:
        R = x.residual(Pm)
        res = residual_norm(R)
        cols = np.arange(D.dim)
        in_max = max(float(R[a.rows, cols].sum()) for a in target) if target else -np.inf
        if D.atom_count <= EXHAUSTIVE_LIMIT:
            scores = _all_scores(R, D)
            mask = np.ones(scores.size, dtype=bool)
            mask[list(ids)] = False
            out_max = float(scores[mask].max()) if mask.any() else -np.inf
        else:
            _, out_max = best_atom_excluding(R, D, ids)
        degenerate = res <= TOL_DEGENERATE
        margin = in_max - out_max
        probes.append(ProbeResult(in_max, out_max, margin, degenerate or margin > TOL_MARGIN, degenerate, res))
    return RecoveryReport(tuple(probes), rank, len(target))


def recovery_outcome(report: RecoveryReport, recovered: bool) -> str:
    if report.all_passed and report.full_rank:
        return "recovered as guaranteed" if recovered else "guarantee violated"
    if recovered:
        return "conditions sufficient, not necessary"
    return "not recovered"


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    P: StochasticMatrix
    true_support: tuple[Atom, ...]
    true_weights: np.ndarray
    seed: int
    dictionary: ColumnSupportDictionary
    effective_nnz: tuple[int, ...]

    def truth(self) -> SparseSolution:
        return SparseSolution(self.true_support, self.true_weights, self.dictionary.dim, self.dictionary.counts)


def plant_instance(
    M: int,
    per_column_candidates: int,
    d: int,
    seed: int,
    distinct_rows: bool = False,
) -> PlantedInstance:
    """Random ``d``-atom mixture on a random sparsity pattern.

    Each column gets ``per_column_candidates`` random rows; atoms pick among
    them and weights are Dirichlet(1). With ``distinct_rows`` the atoms pick
    pairwise different rows in every column. The returned atoms live in the
    dictionary rebuilt from ``P`` itself.
    """
    if d < 1 or M < 1:
        raise ValueError("need M >= 1 and d >= 1")
    if not 1 <= per_column_candidates <= M:
        raise PatternTooSmall(f"per-column candidates must lie in [1, {M}]")
    if distinct_rows and d > per_column_candidates:
        raise PatternTooSmall(f"{d} atoms cannot use distinct rows among {per_column_candidates} candidates")
    if per_column_candidates ** M < d:
        raise PatternTooSmall(f"pattern admits only {per_column_candidates ** M} atoms, need {d}")
    rng = np.random.default_rng(seed)
    pattern = [np.sort(rng.choice(M, size=per_column_candidates, replace=False)) for _ in range(M)]

    choices: list[tuple[int, ...]] = []
    if distinct_rows:
        picks = [rng.permutation(pattern[c])[:d] for c in range(M)]
        choices = [tuple(int(picks[c][j]) for c in range(M)) for j in range(d)]
    else:
        seen = set()
        while len(choices) < d:
            ch = tuple(int(pattern[c][rng.integers(per_column_candidates)]) for c in range(M))
            if ch not in seen:
                seen.add(ch)
                choices.append(ch)
    w = rng.dirichlet(np.ones(d))
    w /= w.sum()

    acc = np.zeros((M, M))
    cols = np.arange(M)
    for ch, wj in zip(choices, w):
        acc[np.asarray(ch), cols] += wj
    P = validate_stochastic(acc)
    D = build_dictionary(P)
    atoms = tuple(D.atom(ch) for ch in choices)
    nnz = tuple(int(np.count_nonzero(acc[:, c] > 0)) for c in range(M))
    w.setflags(write=False)
    return PlantedInstance(P, atoms, w, int(seed), D, nnz)


@dataclass
class DecreaseAudit:
    passed: bool
    worst_slack: float
    checked: int
    failures: list[tuple[int, str]] = field(default_factory=list)


def decrease_audit(trace: RunTrace, slack: float = 1e-8) -> DecreaseAudit:
    """Re-verify residual monotonicity and the sigma-based decrease per step.

    Steps whose starting point was not supported on the current atom set
    (the first step from a random start) fall outside the bound and are
    skipped. From the zero start only the full step ``t = 1`` is feasible,
    so that step is checked against ``||r||^2 + ||d||^2 (1 - 2 sigma)`` and
    may raise the residual.
    """
    worst = np.inf
    failures: list[tuple[int, str]] = []
    checked = 0
    prev_after = None
    for rec in trace.iterations:
        if prev_after is not None and abs(rec.residual_norm_before - prev_after) > 1e-12:
            failures.append((rec.k, "residual before step differs from previous residual after"))
        prev_after = rec.residual_norm_after
        if rec.stagnated:
            gap = abs(rec.residual_norm_after - rec.residual_norm_before)
            worst = min(worst, -gap)
            if gap > slack:
                failures.append((rec.k, "stagnated step changed the residual"))
            continue
        if not rec.prev_in_support:
            continue
        checked += 1
        before2 = rec.residual_norm_before ** 2
        after2 = rec.residual_norm_after ** 2
        if rec.start_feasible:
            mono = rec.residual_norm_before - rec.residual_norm_after
            worst = min(worst, mono)
            if mono < -slack:
                failures.append((rec.k, f"residual increased by {-mono:.3e}"))
        if rec.sigma_k is None:
            failures.append((rec.k, "sigma undefined on a non-stagnated step"))
            continue
        if not -1e-9 <= rec.sigma_k <= 1.0 + 1e-9:
            failures.append((rec.k, f"sigma {rec.sigma_k!r} outside [0, 1]"))
        if rec.start_feasible:
            bound = before2 - rec.sigma_k ** 2 * rec.direction_norm_sq
        else:
            bound = before2 + rec.direction_norm_sq * (1.0 - 2.0 * rec.sigma_k)
        gap = bound - after2
        worst = min(worst, gap)
        if gap < -slack:
            failures.append((rec.k, f"decrease bound violated by {-gap:.3e}"))
    if worst == np.inf:
        worst = 0.0
    return DecreaseAudit(not failures, float(worst), checked, failures)
