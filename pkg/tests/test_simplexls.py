import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_stochastic
from sparsepbn.builtin import load_example
from sparsepbn.dictionary import build_dictionary
from sparsepbn.simplexls import (
    DuplicateAtom,
    GramSystem,
    InfeasiblePoint,
    MaxInnerIterations,
    build_gram,
    check_kkt,
    simplex_project,
    solve_simplex_ls,
)


def project_by_bisection(v):
    lo, hi = v.min() - 1.0, v.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(v - mid, 0).sum() > 1.0:
            lo = mid
        else:
            hi = mid
    return np.maximum(v - 0.5 * (lo + hi), 0)


def grid_min(sys, step=1e-3):
    n = int(round(1 / step))
    if sys.k == 1:
        return sys.objective([1.0])
    if sys.k == 2:
        t = np.linspace(0, 1, n + 1)
        Z = np.stack([t, 1 - t], axis=1)
    else:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        a, b = i[keep] * step, j[keep] * step
        Z = np.stack([a, b, np.clip(1 - a - b, 0, None)], axis=1)
    f = sys.bsq - 2 * Z @ sys.h + np.einsum("ni,ij,nj->n", Z, sys.G, Z)
    return float(f.min())


@given(arrays(float, st.integers(1, 12), elements=st.floats(-10, 10)))
def test_projection_matches_bisection(v):
    z = simplex_project(v)
    assert z.min() >= 0 and z.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(z, project_by_bisection(v), atol=1e-9)
    np.testing.assert_allclose(simplex_project(z), z, atol=1e-12)


def test_projection_examples():
    np.testing.assert_allclose(simplex_project([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5])
    np.testing.assert_allclose(simplex_project([2.0, 0.0]), [1.0, 0.0])
    np.testing.assert_allclose(simplex_project([0.0, 0.0, 0.0, 0.0]), [0.25] * 4)
    with pytest.raises(ValueError):
        simplex_project([])


def test_duplicate_atoms_rejected():
    D = build_dictionary(load_example("p1"))
    with pytest.raises(DuplicateAtom):
        build_gram([D.decode(1), D.decode(1)], load_example("p1"))


def test_kkt_rejects_infeasible():
    sys = GramSystem(np.eye(2) * 4, np.array([1.0, 2.0]), 3.0)
    with pytest.raises(InfeasiblePoint):
        check_kkt(sys, [0.7, 0.7])
    with pytest.raises(InfeasiblePoint):
        check_kkt(sys, [1.0])


def test_single_atom():
    D = build_dictionary(load_example("p1"))
    z, rep = solve_simplex_ls(build_gram([D.decode(3)], load_example("p1")))
    assert z.tolist() == [1.0] and rep.rank == 1


def test_solution_against_grid(rng):
    for _ in range(60):
        M = int(rng.integers(3, 7))
        P = random_stochastic(rng, M, int(rng.integers(2, M + 1)))
        D = build_dictionary(P)
        k = int(rng.integers(1, min(3, D.atom_count) + 1))
        ids = rng.choice(D.atom_count, size=k, replace=False)
        sys = build_gram([D.decode(int(i)) for i in ids], P)
        z, rep = solve_simplex_ls(sys)
        assert rep.converged and rep.max_violation <= 1e-10
        f, g = sys.objective(z), grid_min(sys)
        assert f <= g + 1e-12
        assert g - f <= 1e-5


def test_rank_deficient_system_still_certified():
    # two atoms with the same matrix offset by a third: G is singular
    G = np.array([[4.0, 4.0, 2.0], [4.0, 4.0, 2.0], [2.0, 2.0, 4.0]])
    sys = GramSystem(G, np.array([2.0, 2.0, 1.5]), 1.5)
    z, rep = solve_simplex_ls(sys)
    assert rep.rank == 2 and rep.max_violation <= 1e-12


def test_inner_cap_warns():
    rng = np.random.default_rng(1)
    B = rng.standard_normal((6, 6))
    G = B.T @ B + 1e-6 * np.eye(6)
    sys = GramSystem(G, rng.standard_normal(6), 50.0)
    with pytest.warns(MaxInnerIterations):
        z, rep = solve_simplex_ls(sys, tol_kkt=1e-30, max_inner=3)
    assert not rep.converged and z.sum() == pytest.approx(1.0)
