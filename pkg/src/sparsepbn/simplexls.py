"""Least squares over the probability simplex on a small atom support.

Everything works on the Gram form of the problem: with ``G = A_S^T A_S``,
``h = A_S^T b`` and ``bsq = ||b||^2``,

    ||b - A_S z||^2 = bsq - 2 z.h + z.G.z.

For Boolean-network atoms ``G`` is an integer agreement count and ``h`` is a
sum of entries of ``P``, so the system is built without ever forming ``A_S``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import TOL_WEIGHT
from .dictionary import Atom, atom_dot_b, gram_entry

TOL_KKT = 1e-12
MAX_INNER = 100_000


class DuplicateAtom(ValueError):
    pass


class InfeasiblePoint(ValueError):
    pass


class MaxInnerIterations(RuntimeWarning):
    """The inner solver hit its iteration cap before certifying KKT."""


@dataclass(frozen=True, eq=False)
class GramSystem:
    G: np.ndarray
    h: np.ndarray
    bsq: float

    @property
    def k(self) -> int:
        return self.h.size

    def objective(self, z) -> float:
        """Squared residual ``||b - A_S z||^2`` (clipped at zero)."""
        z = np.asarray(z, dtype=float)
        return max(self.bsq - 2.0 * float(z @ self.h) + float(z @ self.G @ z), 0.0)

    def correlations(self, z) -> np.ndarray:
        """``A_S^T (b - A_S z)``."""
        return self.h - self.G @ np.asarray(z, dtype=float)


@dataclass(frozen=True)
class KktReport:
    multiplier: float
    max_violation: float
    active_set: tuple[int, ...]
    rank: Optional[int] = None
    iterations: int = 0
    converged: bool = True


def simplex_project(v) -> np.ndarray:
    """Euclidean projection onto ``{z >= 0, sum(z) = 1}`` (sort-based)."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def build_gram(atoms: Sequence[Atom], P) -> GramSystem:
    ids = [a.id for a in atoms]
    if len(set(ids)) != len(ids):
        raise DuplicateAtom(f"support contains repeated atoms: {ids}")
    P = np.asarray(P, dtype=float)
    k = len(atoms)
    G = np.empty((k, k))
    for i in range(k):
        G[i, i] = atoms[i].rows.size
        for j in range(i + 1, k):
            G[i, j] = G[j, i] = gram_entry(atoms[i], atoms[j])
    h = np.array([atom_dot_b(a, P) for a in atoms], dtype=float)
    for arr in (G, h):
        arr.setflags(write=False)
    return GramSystem(G, h, float(np.sum(P * P)))


def check_kkt(sys: GramSystem, z, tau_w: float = TOL_WEIGHT) -> KktReport:
    """Measure how far ``z`` is from the simplex optimality conditions.

    Active coordinates must share the multiplier ``mu = z.g`` where
    ``g = A_S^T(b - A_S z)``; inactive coordinates must not exceed it.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (sys.k,):
        raise InfeasiblePoint(f"expected {sys.k} weights, got shape {z.shape}")
    if np.any(z < -1e-10) or abs(z.sum() - 1.0) > 1e-10:
        raise InfeasiblePoint(f"point is not on the simplex (min {z.min()!r}, sum {z.sum()!r})")
    g = sys.correlations(z)
    mu = float(z @ g)
    active = z > tau_w
    viol = 0.0
    if active.any():
        viol = float(np.max(np.abs(g[active] - mu)))
    if (~active).any():
        viol = max(viol, float(np.max(g[~active] - mu)))
    return KktReport(mu, max(viol, 0.0), tuple(int(i) for i in np.flatnonzero(active)))


def _lambda_max(G: np.ndarray, iters: int = 500, tol: float = 1e-12) -> float:
    v = np.ones(G.shape[0]) / np.sqrt(G.shape[0])
    lam = 0.0
    for _ in range(iters):
        w = G @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = float(v @ G @ v)
        if abs(new - lam) <= tol * max(new, 1.0):
            lam = new
            break
        lam = new
    if lam <= 0.0:
        lam = float(np.max(np.abs(G).sum(axis=1)))
    # Rayleigh quotient underestimates; pad so the step stays safe.
    return lam * (1.0 + 1e-9)


def _polish(sys: GramSystem, z: np.ndarray, tau_w: float) -> Optional[np.ndarray]:
    """Exact minimizer on the current active face, if it stays feasible."""
    act = np.flatnonzero(z > tau_w)
    if act.size == 0:
        return None
    Ga = sys.G[np.ix_(act, act)]
    n = act.size
    kkt = np.zeros((n + 1, n + 1))
    kkt[:n, :n] = Ga
    kkt[:n, n] = 1.0
    kkt[n, :n] = 1.0
    rhs = np.concatenate([sys.h[act], [1.0]])
    sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    za = sol[:n]
    if np.any(za < -tau_w) or abs(za.sum() - 1.0) > 1e-12:
        return None
    out = np.zeros_like(z)
    out[act] = np.maximum(za, 0.0)
    return out / out.sum()


def solve_simplex_ls(
    sys: GramSystem,
    tol_kkt: float = TOL_KKT,
    max_inner: int = MAX_INNER,
    z0=None,
    tau_w: float = TOL_WEIGHT,
) -> tuple[np.ndarray, KktReport]:
    """Minimize ``||b - A_S z||`` over the simplex.

    Accelerated projected gradient with a fixed ``1/lambda_max(G)`` step and
    a momentum restart whenever the objective goes up. Every few iterations
    the current active face is solved exactly; the candidate is kept only if
    it lowers the objective. Stops once the KKT violation is below
    ``tol_kkt``; otherwise warns with :class:`MaxInnerIterations` and
    returns the best point seen.
    """
    k = sys.k
    if k < 1:
        raise ValueError("empty support")
    rank = int(np.linalg.matrix_rank(sys.G))
    if k == 1:
        z = np.ones(1)
        rep = check_kkt(sys, z, tau_w)
        return z, KktReport(rep.multiplier, rep.max_violation, rep.active_set, rank, 0, True)

    z = simplex_project(np.ones(k) / k if z0 is None else z0)
    step = 1.0 / _lambda_max(sys.G)
    f = sys.objective(z)
    best_z, best_f = z, f
    y, t = z.copy(), 1.0
    rep = check_kkt(sys, z, tau_w)
    it = 0
    while rep.max_violation > tol_kkt and it < max_inner:
        it += 1
        z_new = simplex_project(y + step * sys.correlations(y))
        f_new = sys.objective(z_new)
        if f_new > f:
            # restart momentum from the last accepted point
            y, t = z.copy(), 1.0
            z_new = simplex_project(z + step * sys.correlations(z))
            f_new = sys.objective(z_new)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = z_new + ((t - 1.0) / t_new) * (z_new - z)
        z, f, t = z_new, f_new, t_new
        if f <= best_f:
            best_z, best_f = z, f
        if it % 10 == 0 or it < 10:
            cand = _polish(sys, z, tau_w)
            if cand is not None and sys.objective(cand) <= f + 1e-12 * (1.0 + f):
                crep = check_kkt(sys, cand, tau_w)
                if crep.max_violation <= tol_kkt:
                    best_z, rep = cand, crep
                    break
        rep = check_kkt(sys, z, tau_w)
        if rep.max_violation <= tol_kkt:
            best_z = z
            break
    else:
        rep = check_kkt(sys, best_z, tau_w)

    z = best_z
    converged = rep.max_violation <= tol_kkt
    if not converged:
        warnings.warn(
            f"inner solver stopped after {it} iterations with KKT violation {rep.max_violation:.3e}",
            MaxInnerIterations,
            stacklevel=2,
        )
    return z, KktReport(rep.multiplier, rep.max_violation, rep.active_set, rank, it, converged)
