"""Acceptance checks, one test per criterion.

Each check records a ``PASS``/``FAIL`` line; the lines are printed at the end
of the pytest session and when the module is run as a script.
"""

import time

import numpy as np
import pytest

from conftest import explicit_A, random_stochastic
from sparsepbn.analysis import decrease_audit, plant_instance, recovery_condition_check, res_sum_table
from sparsepbn.baselines import pg_run
from sparsepbn.builtin import load_example
from sparsepbn.core import StoppingCriteria, vectorize
from sparsepbn.dictionary import build_dictionary, correlation_argmax
from sparsepbn.momp import InitSpec, momp_run
from sparsepbn.simplexls import build_gram, check_kkt, solve_simplex_ls

LINES: list[str] = []


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def close(got, want, tol):
    return len(got) >= len(want) and all(abs(g - w) <= tol for g, w in zip(got, want))


def fmt(vals, k=5):
    return "(" + ", ".join(f"{v:.{k}g}" for v in vals) + ")"


def timed_momp(name, stop=None, init=None):
    P = load_example(name)
    t0 = time.perf_counter()
    x, tr = momp_run(P, init, stop(P) if stop else None)
    return P, x, tr, time.perf_counter() - t0


def check_table(name, res_want, sums_want=None, max_iter=5, atoms=None, limit=1.0):
    P, x, tr, dt = timed_momp(name)
    t = res_sum_table(x, P)
    ok = (
        len(tr.iterations) <= max_iter
        and tr.residuals[-1] <= 1e-8
        and close(t.res(), res_want, 1e-3)
        and (sums_want is None or close(t.sums(), sums_want, 1e-3))
        and (atoms is None or len(x) == atoms)
        and dt < limit
    )
    detail = (
        f"{name}: {len(tr.iterations)} iterations, {len(x)} atoms, residual {tr.residuals[-1]:.2e}, "
        f"res {fmt(t.res()[:len(res_want)])}, {dt:.3f} s"
    )
    return ok, detail, t


def test_criterion_1_p1():
    ok, detail, t = check_table("p1", (0.89443, 0.5, 0.26458, 0.1), (0.45, 0.70, 0.85, 0.95))
    report(1, ok, detail + f", sum {fmt(t.sums()[:4], 3)}")


def test_criterion_2_p2():
    ok, detail, t = check_table("p2", (0.78740, 0.54772, 0.31623, 0.2))
    ok = ok and len(t.rows) >= 5 and abs(t.rows[4].sum - 1.0) <= 1e-6
    report(2, ok, detail + f", sum(5) {t.rows[-1].sum:.6f}")


def test_criterion_3_p3():
    ok_a, da, _ = check_table("p3a", (1.7695, 1.0241, 0.56639, 0.028284))
    ok_b, db, _ = check_table("p3b", (1.7504, 1.0292, 0.56851, 0.056569), atoms=5)
    report(3, ok_a and ok_b, f"{da}; {db}")


def test_criterion_4_p4_p5():
    P4, x4, tr4, dt4 = timed_momp("p4")
    ok4 = tr4.residuals[-1] <= 1e-8 and len(x4) == 5 and dt4 < 2.0 and build_dictionary(P4).atom_count == 6561
    ok5, d5, _ = check_table("p5", (1.2172, 0.64622, 0.33941), max_iter=64, atoms=4, limit=2.0)
    ok5 = ok5 and build_dictionary(load_example("p5")).atom_count == 1024
    report(4, ok4 and ok5, f"p4: {len(x4)} atoms, residual {tr4.residuals[-1]:.2e}, {dt4:.3f} s; {d5}")


def test_criterion_5_p6():
    P, x, tr, dt = timed_momp("p6", stop=StoppingCriteria.large)
    # x^0 = 0 lies outside the simplex, so monotonicity is read from x^1 on
    res = tr.residuals[1:]
    mono = all(b <= a + 1e-10 for a, b in zip(res, res[1:]))
    ok = (
        build_dictionary(P).atom_count == 25920
        and mono
        and res[-1] <= 1.2e-2
        and len(x) <= 64
        and 12 <= len(x) <= 25
        and dt < 30.0
    )
    report(5, ok, f"p6: {len(x)} atoms, residual {res[-1]:.4e}, {tr.termination_reason.value}, "
                  f"nonincreasing from x^1: {mono}, {dt:.3f} s")


def test_criterion_6_random_init():
    P = load_example("p1")
    worst, same, runs = 0.0, True, 0
    for s in (1, 2):
        for seed in range(25):
            a = momp_run(P, InitSpec.random_sparse(s, seed))
            b = momp_run(P, InitSpec.random_sparse(s, seed))
            same &= a[1].iterations == b[1].iterations and a[0].as_dict() == b[0].as_dict()
            worst = max(worst, a[1].residuals[-1])
            runs += 1
    report(6, same and worst <= 1e-8, f"{runs} seeded runs, identical traces: {same}, worst residual {worst:.2e}")


def test_criterion_7_property_suite():
    t0 = time.perf_counter()
    n = audits = kkt = recov_applicable = recov_ok = 0
    sigma_ok = True
    problems = []
    for seed in range(240):
        rng = np.random.default_rng(7_000 + seed)
        M = int(rng.choice([4, 8]))
        d = int(rng.integers(1, 6))
        cands = int(rng.integers(2, min(M, 5) + 1))
        distinct = d <= cands and bool(rng.integers(2))
        inst = plant_instance(M, cands, d, seed, distinct_rows=distinct)
        x, tr = momp_run(inst.P, target_support=inst.true_support)
        n += 1
        audit = decrease_audit(tr, slack=1e-8)
        audits += audit.passed
        if not audit.passed:
            problems.append(("audit", seed, audit.failures))
        for r in tr.iterations:
            if r.sigma_k is not None and not -1e-9 <= r.sigma_k <= 1 + 1e-9:
                sigma_ok = False
        Pm = np.asarray(inst.P)
        if all(check_kkt(build_gram(list(it.support), Pm), it.weights).max_violation <= 1e-10 for it in tr.iterates[1:]):
            kkt += 1
        else:
            problems.append(("kkt", seed))
        rep = recovery_condition_check(inst.P, inst.true_support, tr.iterates[:-1], inst.dictionary)
        if rep.all_passed and rep.full_rank:
            recov_applicable += 1
            if x.l1_distance(inst.truth()) <= 1e-6 and len(tr.iterations) <= d:
                recov_ok += 1
            else:
                problems.append(("recovery", seed))
    dt = time.perf_counter() - t0
    ok = n >= 200 and audits == n and sigma_ok and kkt == n and recov_ok == recov_applicable and dt < 60
    report(7, ok, f"{n} instances: audit {audits}/{n}, sigma in [0,1]: {sigma_ok}, KKT {kkt}/{n}, "
                  f"recovered {recov_ok}/{recov_applicable} where the check applies, {dt:.2f} s"
                  + (f", problems {problems[:3]}" if problems else ""))


def _grid_min(sys, step=1e-3):
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
    return float((sys.bsq - 2 * Z @ sys.h + np.einsum("ni,ij,nj->n", Z, sys.G, Z)).min())


def test_criterion_8_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    score_ok = atom_ok = 0
    for _ in range(100):
        M = int(rng.integers(2, 7))
        P = random_stochastic(rng, M, int(rng.integers(1, min(M, 4) + 1)))
        D = build_dictionary(P)
        assert D.atom_count <= 10_000
        R = rng.standard_normal((M, M))
        scores = explicit_A(D.candidates).T @ vectorize(R)
        atom, s = correlation_argmax(R, D)
        score_ok += abs(s - scores.max()) <= 1e-12
        atom_ok += atom.id == int(np.argmax(scores))
    worst_gap, solves = 0.0, 0
    for _ in range(60):
        M = int(rng.integers(3, 7))
        P = random_stochastic(rng, M, int(rng.integers(2, M + 1)))
        D = build_dictionary(P)
        k = int(rng.integers(1, min(3, D.atom_count) + 1))
        ids = rng.choice(D.atom_count, size=k, replace=False)
        sys = build_gram([D.decode(int(i)) for i in ids], P)
        z, _ = solve_simplex_ls(sys)
        worst_gap = max(worst_gap, abs(_grid_min(sys) - sys.objective(z)))
        solves += 1
    dt = time.perf_counter() - t0
    ok = score_ok == 100 and atom_ok == 100 and worst_gap <= 1e-5 and dt < 60
    report(8, ok, f"argmax score {score_ok}/100, atom {atom_ok}/100; {solves} simplex solves, "
                  f"worst grid gap {worst_gap:.2e}, {dt:.2f} s")


def test_criterion_9_pg_baseline():
    P = load_example("p1")
    x, tr = pg_run(P)
    momp_atoms = len(momp_run(P)[0])
    mono = all(b <= a + 1e-15 for a, b in zip(tr.objectives, tr.objectives[1:]))
    feasible = x.weights.min() >= 0 and abs(x.weights.sum() - 1.0) <= 1e-10
    ok = feasible and mono and tr.residuals[-1] <= 1e-6 and len(x) > momp_atoms
    report(9, ok, f"pg: {tr.steps} steps, residual {tr.residuals[-1]:.2e}, monotone {mono}, "
                  f"{len(x)} atoms vs momp {momp_atoms}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
