import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsepbn.builtin import load_example
from sparsepbn.core import (
    ColumnSumViolation,
    EntryAboveOne,
    NegativeEntry,
    NotSquare,
    SparseSolution,
    StoppingCriteria,
    devectorize,
    residual_norm,
    validate_stochastic,
    vectorize,
)
from sparsepbn.dictionary import build_dictionary


def test_identity_is_valid():
    P = validate_stochastic(np.eye(3))
    assert P.dim == 3 and P.m == 9
    with pytest.raises(ValueError):
        P.entries[0, 0] = 2.0


def test_column_sum_violation_reports_column():
    with pytest.raises(ColumnSumViolation) as e:
        validate_stochastic([[0.5, 0.5], [0.4, 0.5]])
    assert e.value.col == 0
    assert str(e.value).startswith("ColumnSumViolation")


@pytest.mark.parametrize(
    "m, exc",
    [
        ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], NotSquare),
        ([[1.1, 0.0], [-0.1, 1.0]], NegativeEntry),
        ([[1.5, 0.0], [0.0, 1.0]], EntryAboveOne),
    ],
)
def test_rejections(m, exc):
    with pytest.raises(exc):
        validate_stochastic(m)


def test_tiny_negative_is_clamped():
    P = validate_stochastic([[1.0 + 1e-15, 0.0], [-1e-15, 1.0]])
    assert P.entries.min() == 0.0


def test_tolerance_widening_admits_p6():
    raw = np.array(load_example("p6"))
    with pytest.raises(ColumnSumViolation):
        validate_stochastic(raw)
    validate_stochastic(raw, tol_col=0.011)


def test_vectorize_is_column_major():
    P = np.arange(9.0).reshape(3, 3)
    v = vectorize(P)
    assert v[1] == P[1, 0] and v[3] == P[0, 1]
    np.testing.assert_array_equal(devectorize(v), P)


@given(st.integers(1, 6), st.integers(0, 2**31))
def test_vectorize_round_trip(M, seed):
    P = np.random.default_rng(seed).random((M, M))
    np.testing.assert_array_equal(devectorize(vectorize(P)), P)
    assert residual_norm(P) == pytest.approx(np.linalg.norm(P))


def test_profiles():
    P = load_example("p1")
    d = StoppingCriteria.default(P)
    assert (d.tol_res, d.tol_dx, d.tol_dres, d.max_iter) == (1e-8, 1e-5, None, 16)
    lg = StoppingCriteria.profile("large", P)
    assert (lg.tol_dx, lg.tol_dres) == (1e-2, 1e-3)
    with pytest.raises(ValueError):
        StoppingCriteria.profile("huge", P)
    with pytest.raises(ValueError):
        StoppingCriteria(tol_res=0.0)
    with pytest.raises(ValueError):
        StoppingCriteria(max_iter=0)


def test_solution_invariants():
    P = load_example("p1")
    D = build_dictionary(P)
    a, b = D.decode(0), D.decode(1)
    x = SparseSolution((a, b), [0.25, 0.75], D.dim, D.counts)
    assert x.as_dict() == {0: 0.25, 1: 0.75}
    with pytest.raises(ValueError):
        SparseSolution((a, b), [0.5, 0.6], D.dim, D.counts)
    with pytest.raises(ValueError):
        SparseSolution((a, a), [0.5, 0.5], D.dim, D.counts)
    with pytest.raises(ValueError):
        SparseSolution((a,), [-0.1], D.dim, D.counts)
    tiny = SparseSolution((a, b), [1.0, 1e-13], D.dim, D.counts)
    assert tiny.weights[1] == 0.0


def test_zero_solution_and_l1_over_union():
    P = load_example("p1")
    D = build_dictionary(P)
    zero = SparseSolution.zero(D.dim, D.counts)
    assert not zero.feasible and len(zero) == 0
    assert residual_norm(zero.residual(P)) == pytest.approx(np.linalg.norm(np.asarray(P)))
    x = SparseSolution((D.decode(0), D.decode(1)), [0.25, 0.75], D.dim, D.counts)
    y = SparseSolution((D.decode(1), D.decode(2)), [0.5, 0.5], D.dim, D.counts)
    assert x.l1_distance(y) == pytest.approx(0.25 + 0.25 + 0.5)
    assert x.l1_distance(zero) == pytest.approx(1.0)


def test_reconstruct_is_column_stochastic():
    P = load_example("p2")
    D = build_dictionary(P)
    x = SparseSolution(tuple(D.decode(i) for i in (0, 40, 80)), [0.2, 0.3, 0.5], D.dim, D.counts)
    np.testing.assert_allclose(x.reconstruct().sum(axis=0), 1.0)
