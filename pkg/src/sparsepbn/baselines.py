"""Reference methods: classic OMP on dense matrices and projected gradient
over the full (dense in N) weight vector."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import TOL_WEIGHT, SparseSolution, StochasticMatrix, StoppingCriteria, residual_norm
from .dictionary import ColumnSupportDictionary, build_dictionary
from .momp import InitSpec, Termination, make_init
from .simplexls import simplex_project


class RankDeficientSupport(np.linalg.LinAlgError):
    pass


class DictionaryTooLarge(ValueError):
    def __init__(self, N: int, n_cap: int):
        super().__init__(f"dictionary has {N} atoms, above the dense cap of {n_cap}")
        self.N, self.n_cap = N, n_cap


@dataclass
class OmpTrace:
    selected: list[int] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)


def omp_run(Phi, y, sparsity: int, tol: float = 1e-12) -> tuple[np.ndarray, OmpTrace]:
    """Orthogonal matching pursuit for ``y = Phi w``.

    Selects by absolute correlation and refits by least squares (QR) on the
    chosen columns. Stops after ``sparsity`` columns or once the residual
    falls below ``tol * ||y||``.
    """
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float)
    q, Q = Phi.shape
    if sparsity > min(q, Q):
        raise ValueError(f"sparsity {sparsity} exceeds min{Phi.shape}")
    w = np.zeros(Q)
    support: list[int] = []
    r = y.copy()
    trace = OmpTrace(residuals=[float(np.linalg.norm(r))])
    ynorm = float(np.linalg.norm(y))
    while len(support) < sparsity and trace.residuals[-1] > tol * max(ynorm, 1.0):
        corr = np.abs(Phi.T @ r)
        corr[support] = -np.inf
        j = int(np.argmax(corr))
        support.append(j)
        Qf, Rf = np.linalg.qr(Phi[:, support])
        diag = np.abs(np.diag(Rf))
        if diag.min() <= 1e-12 * max(diag.max(), 1.0):
            raise RankDeficientSupport(f"columns {support} are linearly dependent")
        coef = np.linalg.solve(Rf, Qf.T @ y)
        w[:] = 0.0
        w[support] = coef
        r = y - Phi[:, support] @ coef
        trace.selected.append(j)
        trace.residuals.append(float(np.linalg.norm(r)))
    return w, trace


@dataclass(frozen=True)
class PgConfig:
    max_steps: int = 100_000
    step_size: Optional[float] = None
    stop: Optional[StoppingCriteria] = None
    n_cap: int = 100_000

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")


@dataclass
class PgTrace:
    residuals: list[float] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    step_size: float = 0.0
    steps: int = 0
    termination_reason: Optional[Termination] = None
    warnings: list[str] = field(default_factory=list)


class DenseDictionary:
    """All atoms of a (small) dictionary as an ``N x M`` table of rows."""

    def __init__(self, D: ColumnSupportDictionary, n_cap: int = 100_000):
        N = D.atom_count
        if N > n_cap:
            raise DictionaryTooLarge(N, n_cap)
        self.D = D
        self.N = N
        digits = np.zeros((N, D.dim), dtype=np.intp)
        ids = np.arange(N)
        for c, n in enumerate(D.counts):
            ids, digits[:, c] = np.divmod(ids, n)
        cands = [np.asarray(c, dtype=np.intp) for c in D.candidates]
        self.rows = np.stack([cands[c][digits[:, c]] for c in range(D.dim)], axis=1)
        self._cols = np.broadcast_to(np.arange(D.dim), self.rows.shape)

    def apply(self, x) -> np.ndarray:
        """``Ax`` as an M x M matrix."""
        out = np.zeros((self.D.dim, self.D.dim))
        np.add.at(out, (self.rows, self._cols), np.broadcast_to(np.asarray(x)[:, None], self.rows.shape))
        return out

    def adjoint(self, R) -> np.ndarray:
        """``A^T vec(R)``: the correlation of every atom with ``R``."""
        return np.asarray(R, dtype=float)[self.rows, self._cols].sum(axis=1)


def implicit_grad(P, x, dense: Optional[DenseDictionary] = None, n_cap: int = 100_000) -> np.ndarray:
    """``A^T (A x - b)`` without forming ``A``."""
    if dense is None:
        dense = DenseDictionary(build_dictionary(P), n_cap)
    return dense.adjoint(dense.apply(x) - np.asarray(P, dtype=float))


def _lipschitz(dense: DenseDictionary, iters: int = 200) -> float:
    v = np.ones(dense.N) / np.sqrt(dense.N)
    lam = 0.0
    for _ in range(iters):
        w = dense.adjoint(dense.apply(v))
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            break
        new = float(v @ w)
        v = w / nrm
        if abs(new - lam) <= 1e-12 * new:
            lam = new
            break
        lam = new
    return lam * (1.0 + 1e-6)


def pg_run(
    P: StochasticMatrix,
    cfg: Optional[PgConfig] = None,
    init: Optional[InitSpec] = None,
) -> tuple[SparseSolution, PgTrace]:
    """Projected gradient ``x <- proj(x - eta * A^T(Ax - b))`` over all atoms.

    Starts from the projection of the initial point, so the zero start
    becomes the uniform distribution.
    """
    cfg = cfg or PgConfig()
    D = build_dictionary(P)
    dense = DenseDictionary(D, cfg.n_cap)
    stop = cfg.stop or StoppingCriteria(tol_res=1e-10, tol_dx=1e-15, max_iter=cfg.max_steps)
    Pm = np.asarray(P, dtype=float)

    x = np.zeros(dense.N)
    if init is not None and init.kind != "zero":
        sol = make_init(init, D)
        x[sol.ids] = sol.weights
    x = simplex_project(x)
    eta = cfg.step_size if cfg.step_size is not None else 1.0 / _lipschitz(dense)

    R = dense.apply(x) - Pm
    res = residual_norm(R)
    trace = PgTrace(residuals=[res], objectives=[0.5 * res * res], step_size=eta)
    for t in range(cfg.max_steps):
        if res <= stop.tol_res:
            trace.termination_reason = Termination.RESIDUAL_TOL
            break
        x_new = simplex_project(x - eta * dense.adjoint(R))
        R = dense.apply(x_new) - Pm
        res_new = residual_norm(R)
        dx = float(np.abs(x_new - x).sum())
        trace.residuals.append(res_new)
        trace.objectives.append(0.5 * res_new * res_new)
        trace.steps = t + 1
        dres = abs(res_new - res)
        x, res = x_new, res_new
        if res <= stop.tol_res:
            trace.termination_reason = Termination.RESIDUAL_TOL
            break
        if dx <= stop.tol_dx:
            trace.termination_reason = Termination.ITERATE_CHANGE_TOL
            break
        if stop.tol_dres is not None and dres <= stop.tol_dres:
            trace.termination_reason = Termination.RESIDUAL_CHANGE_TOL
            break
    else:
        trace.termination_reason = Termination.MAX_ITERATIONS

    keep = np.flatnonzero(x >= TOL_WEIGHT)
    w = x[keep] / x[keep].sum()
    sol = SparseSolution(tuple(D.decode(int(i)) for i in keep), w, D.dim, D.counts)
    return sol, trace


def dense_vector(x: SparseSolution, N: int) -> np.ndarray:
    out = np.zeros(N)
    out[x.ids] = x.weights
    return out
