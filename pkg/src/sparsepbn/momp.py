"""Modified orthogonal matching pursuit over the implicit atom dictionary.

Each outer step adds the atom with the largest residual correlation to the
support and refits the weights by least squares over the probability simplex.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import SparseSolution, StochasticMatrix, StoppingCriteria, TOL_SUPP, residual_norm
from .dictionary import Atom, ColumnSupportDictionary, atom_score, build_dictionary, correlation_argmax, gram_entry
from .simplexls import MAX_INNER, TOL_KKT, MaxInnerIterations, build_gram, solve_simplex_ls

TOL_STAGNATION = 1e-12


class STooLarge(ValueError):
    pass


class Termination(str, enum.Enum):
    RESIDUAL_TOL = "ResidualTol"
    ITERATE_CHANGE_TOL = "IterateChangeTol"
    RESIDUAL_CHANGE_TOL = "ResidualChangeTol"
    STAGNATION = "Stagnation"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class InitSpec:
    """Starting point: ``zero``, ``random_sparse`` (needs ``s`` and ``seed``) or ``explicit``."""

    kind: str = "zero"
    s: int = 1
    seed: int = 0
    solution: Optional[SparseSolution] = None

    def __post_init__(self):
        if self.kind not in ("zero", "random_sparse", "explicit"):
            raise ValueError(f"unknown init kind {self.kind!r}")
        if self.kind == "random_sparse" and self.s < 1:
            raise ValueError("random_sparse needs s >= 1")
        if self.kind == "explicit" and (self.solution is None or not self.solution.feasible):
            raise ValueError("explicit init needs a feasible SparseSolution")

    @classmethod
    def zero(cls) -> "InitSpec":
        return cls("zero")

    @classmethod
    def random_sparse(cls, s: int, seed: int) -> "InitSpec":
        return cls("random_sparse", s=int(s), seed=int(seed))

    @classmethod
    def explicit(cls, solution: SparseSolution) -> "InitSpec":
        return cls("explicit", solution=solution)

    def describe(self) -> dict:
        if self.kind == "random_sparse":
            return {"kind": self.kind, "s": self.s, "seed": self.seed}
        if self.kind == "explicit":
            return {"kind": self.kind, "support": self.solution.ids, "weights": self.solution.weights.tolist()}
        return {"kind": self.kind}


@dataclass(frozen=True)
class IterationRecord:
    k: int
    selected_atom_id: int
    score: float
    current_correlation: float
    residual_norm_before: float
    residual_norm_after: float
    direction_norm_sq: float
    sigma_k: Optional[float]
    kkt_violation: float
    stagnated: bool
    support_size: int
    inner_iterations: int = 0
    prev_in_support: bool = True
    inside_target_support: Optional[bool] = None
    start_feasible: bool = True


@dataclass
class RunTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    termination_reason: Optional[Termination] = None
    iterates: list[SparseSolution] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def residuals(self) -> list[float]:
        """Residual norm of every iterate, starting with the initial point."""
        if not self.iterations:
            return []
        return [self.iterations[0].residual_norm_before] + [r.residual_norm_after for r in self.iterations]


def make_init(init: InitSpec, D: ColumnSupportDictionary) -> SparseSolution:
    if init.kind == "zero":
        return SparseSolution.zero(D.dim, D.counts)
    if init.kind == "explicit":
        sol = init.solution
        if sol.dim != D.dim or tuple(sol.counts) != D.counts:
            raise ValueError("explicit init was built against a different dictionary")
        return sol
    if init.s > D.atom_count:
        raise STooLarge(f"s = {init.s} exceeds the {D.atom_count} available atoms")
    rng = np.random.default_rng(init.seed)
    ids = D.random_atom_ids(init.s, rng)
    w = rng.exponential(size=init.s)
    w /= w.sum()
    return SparseSolution(tuple(D.decode(i) for i in ids), w, D.dim, D.counts)


def _correlations(x: SparseSolution, R: np.ndarray) -> np.ndarray:
    return np.array([atom_score(a, R) for a in x.support])


def _direction_norm_sq(atom: Atom, x: SparseSolution) -> float:
    """``||A(e_j - x)||^2`` from atom agreement counts."""
    if not len(x):
        return float(atom.rows.size)
    w = x.weights
    cross = np.array([gram_entry(atom, a) for a in x.support], dtype=float)
    G = np.array([[gram_entry(a, b) for b in x.support] for a in x.support], dtype=float)
    return float(atom.rows.size - 2.0 * w @ cross + w @ G @ w)


def sigma_k(R_before, atom: Atom, x_k: SparseSolution) -> Optional[float]:
    """Normalized correlation of the step direction ``e_j - x^k``.

    ``None`` when ``A e_j == A x^k``.
    """
    R = np.asarray(R_before, dtype=float)
    denom = _direction_norm_sq(atom, x_k)
    if denom <= TOL_STAGNATION:
        return None
    cur = float(x_k.weights @ _correlations(x_k, R)) if len(x_k) else 0.0
    return (atom_score(atom, R) - cur) / denom


def momp_run(
    P: StochasticMatrix,
    init: Optional[InitSpec] = None,
    stop: Optional[StoppingCriteria] = None,
    *,
    dictionary: Optional[ColumnSupportDictionary] = None,
    tau_supp: float = TOL_SUPP,
    tol_kkt: float = TOL_KKT,
    max_inner: int = MAX_INNER,
    target_support: Optional[Sequence[Atom]] = None,
) -> tuple[SparseSolution, RunTrace]:
    """Run the pursuit on ``P`` and return the final solution with its trace."""
    D = dictionary if dictionary is not None else build_dictionary(P, tau_supp)
    init = init or InitSpec.zero()
    stop = stop or StoppingCriteria.default(P)
    Pm = np.asarray(P, dtype=float)
    target_ids = None if target_support is None else {a.id for a in target_support}

    x = make_init(init, D)
    support: list[Atom] = []
    trace = RunTrace(iterates=[x])
    R = x.residual(Pm)
    res = residual_norm(R)
    if res <= stop.tol_res:
        trace.termination_reason = Termination.RESIDUAL_TOL
        return x, trace

    for k in range(stop.max_iter):
        atom, score = correlation_argmax(R, D)
        cur = float(x.weights @ _correlations(x, R)) if len(x) else 0.0
        denom = _direction_norm_sq(atom, x)
        sig = None if denom <= TOL_STAGNATION else (score - cur) / denom
        in_support = any(a.id == atom.id for a in support)
        prev_in_support = {a.id for a in x.support} <= {a.id for a in support}
        # Only after a subproblem solve does score == x^T A^T r prove optimality.
        tied = prev_in_support and score - cur <= TOL_STAGNATION * (1.0 + abs(score))
        inside = None if target_ids is None else atom.id in target_ids

        if in_support or sig is None or tied:
            trace.iterations.append(
                IterationRecord(k, atom.id, score, cur, res, res, denom, sig, 0.0, True,
                                len(support), 0, prev_in_support, inside, x.feasible)
            )
            trace.termination_reason = Termination.STAGNATION
            break

        support.append(atom)
        z0 = np.zeros(len(support))
        if prev_in_support and len(x):
            pos = {a.id: i for i, a in enumerate(support)}
            for a, w in zip(x.support, x.weights):
                z0[pos[a.id]] = w
        else:
            z0[-1] = 1.0
        sys = build_gram(support, Pm)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", MaxInnerIterations)
            z, rep = solve_simplex_ls(sys, tol_kkt=tol_kkt, max_inner=max_inner, z0=z0)
        for w in caught:
            trace.warnings.append(f"iteration {k}: {w.message}")

        x_new = SparseSolution(tuple(support), z / z.sum(), D.dim, D.counts)
        R_new = x_new.residual(Pm)
        res_new = residual_norm(R_new)
        trace.iterations.append(
            IterationRecord(k, atom.id, score, cur, res, res_new, denom, sig, rep.max_violation, False,
                            len(support), rep.iterations, prev_in_support, inside, x.feasible)
        )
        trace.iterates.append(x_new)
        dx = x_new.l1_distance(x)
        dres = abs(res_new - res)
        x, R, res = x_new, R_new, res_new

        if res <= stop.tol_res:
            trace.termination_reason = Termination.RESIDUAL_TOL
        elif dx <= stop.tol_dx:
            trace.termination_reason = Termination.ITERATE_CHANGE_TOL
        elif stop.tol_dres is not None and dres <= stop.tol_dres:
            trace.termination_reason = Termination.RESIDUAL_CHANGE_TOL
        elif k + 1 >= stop.max_iter:
            trace.termination_reason = Termination.MAX_ITERATIONS
        if trace.termination_reason is not None:
            break

    return x, trace
