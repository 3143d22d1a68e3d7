"""Command line front end: ``sparsepbn solve`` and ``sparsepbn gen``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import decrease_audit, plant_instance, recovery_condition_check, recovery_outcome, res_sum_table
from .baselines import PgConfig, pg_run
from .builtin import NAMES, P6_TOL_COL, load_example
from .core import TOL_COL, SparseSolution, StochasticMatrix, StoppingCriteria, ValidationError, validate_stochastic
from .dictionary import Atom, ColumnSupportDictionary, build_dictionary
from .momp import InitSpec, momp_run

EXIT_OK, EXIT_INVALID, EXIT_STRICT = 0, 2, 3
TOL_RECOVERED = 1e-6


class MatrixParseError(ValidationError):
    def __init__(self, path, line: Optional[int], msg: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")
        self.line = line


def parse_matrix_csv(path, tol_col: float = TOL_COL) -> StochasticMatrix:
    """Read a square CSV matrix. Lines starting with ``#`` and blank lines are skipped."""
    rows, lines = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            fields = next(csv.reader([text]))
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                bad = next(f for f in fields if not _is_float(f))
                raise MatrixParseError(path, lineno, f"non-numeric field {bad.strip()!r}") from None
            lines.append(lineno)
            if len(rows[-1]) != len(rows[0]):
                raise MatrixParseError(path, lineno, f"expected {len(rows[0])} fields, got {len(rows[-1])}")
    if not rows:
        raise MatrixParseError(path, None, "no matrix rows found")
    if len(rows) != len(rows[0]):
        raise MatrixParseError(path, lines[-1], f"matrix is {len(rows)}x{len(rows[0])}, expected square")
    return validate_stochastic(np.array(rows), tol_col=tol_col)


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_matrix_csv(path, P, header: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            fh.write(f"# {header}\n")
        for row in np.asarray(P, dtype=float):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def input_digest(P) -> str:
    a = np.ascontiguousarray(np.asarray(P, dtype="<f8"))
    return "sha256:" + hashlib.sha256(a.tobytes()).hexdigest()


def _atom_json(atom) -> dict:
    return {"id": atom.id, "rows": {str(c): int(r) for c, r in enumerate(atom.rows)}}


@dataclass
class RunResult:
    """Everything a run produced, in a JSON-friendly shape."""

    method: str
    input_digest: str
    dim: int
    counts: list
    atoms: list
    weights: list
    trace: dict
    res_sum: list
    config: dict
    wall_time: float

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        return cls(**json.loads(text))

    def solution(self) -> SparseSolution:
        support = []
        for a in self.atoms:
            rows = np.array([a["rows"][str(c)] for c in range(self.dim)], dtype=np.intp)
            rows.setflags(write=False)
            support.append(Atom(rows, int(a["id"])))
        return SparseSolution(tuple(support), np.array(self.weights), self.dim, tuple(self.counts))


def _load_matrix(args) -> tuple[StochasticMatrix, str]:
    if args.example:
        return load_example(args.example), f"example:{args.example}"
    return parse_matrix_csv(args.input, tol_col=args.tol_col), str(args.input)


def _stopping(args, P) -> StoppingCriteria:
    stop = StoppingCriteria.profile(args.profile, P)
    overrides = {}
    for name in ("tol_res", "tol_dx", "tol_dres", "max_iter"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    return dataclasses.replace(stop, **overrides)


def _init(args) -> InitSpec:
    if args.init == "random":
        return InitSpec.random_sparse(args.s, args.seed)
    return InitSpec.zero()


def load_truth(path, D: ColumnSupportDictionary) -> SparseSolution:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if int(data["dim"]) != D.dim:
        raise ValidationError(f"truth file has dim {data['dim']}, matrix has {D.dim}")
    atoms = tuple(D.atom(a["rows"]) for a in data["atoms"])
    return SparseSolution(atoms, np.array(data["weights"], dtype=float), D.dim, D.counts)


def _solve(args) -> int:
    P, source = _load_matrix(args)
    init = _init(args)
    t0 = time.perf_counter()
    if args.method == "momp":
        stop = _stopping(args, P)
        x, tr = momp_run(P, init, stop)
        wall = time.perf_counter() - t0
        iterations = [
            {
                "k": r.k,
                "selected_atom_id": r.selected_atom_id,
                "score": r.score,
                "residual_before": r.residual_norm_before,
                "residual_after": r.residual_norm_after,
                "sigma_k": r.sigma_k,
                "kkt_violation": r.kkt_violation,
                "stagnated": r.stagnated,
            }
            for r in tr.iterations
        ]
        residuals = [float(v) for v in tr.residuals] or [float(np.linalg.norm(np.asarray(P)))]
        sigmas = [r.sigma_k for r in tr.iterations]
        trace = {
            "termination_reason": tr.termination_reason.value,
            "iterations": iterations,
            "residuals": residuals,
            "warnings": list(tr.warnings),
        }
        warn = list(tr.warnings)
        stop_echo = dataclasses.asdict(stop)
    else:
        stop = None
        if any(getattr(args, n) is not None for n in ("tol_res", "tol_dx", "tol_dres")):
            stop = StoppingCriteria(
                tol_res=args.tol_res or 1e-10,
                tol_dx=args.tol_dx or 1e-15,
                tol_dres=args.tol_dres,
                max_iter=args.max_iter or 100_000,
            )
        cfg = PgConfig(max_steps=args.max_iter or 100_000, stop=stop)
        x, tr = pg_run(P, cfg, init)
        wall = time.perf_counter() - t0
        residuals = [float(v) for v in tr.residuals]
        sigmas = []
        trace = {
            "termination_reason": tr.termination_reason.value,
            "steps": tr.steps,
            "step_size": tr.step_size,
            "residuals": residuals,
            "warnings": list(tr.warnings),
        }
        warn = list(tr.warnings)
        if tr.termination_reason.value == "MaxIterations":
            warn.append(f"projected gradient stopped after {tr.steps} steps without converging")
        stop_echo = dataclasses.asdict(cfg.stop) if cfg.stop else {"max_steps": cfg.max_steps}

    table = res_sum_table(x, P)
    result = RunResult(
        method=args.method,
        input_digest=input_digest(P),
        dim=P.dim,
        counts=list(x.counts),
        atoms=[_atom_json(a) for a in x.support],
        weights=[float(w) for w in x.weights],
        trace=trace,
        res_sum=[{"j": r.j, "res": r.res, "sum": r.sum, "atom_id": r.atom_id} for r in table.rows],
        config={"source": source, "init": init.describe(), "stopping": stop_echo, "profile": args.profile},
        wall_time=wall,
    )

    if args.out:
        Path(args.out).write_text(result.to_json(), encoding="utf-8")
    if args.table:
        with open(args.table, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "res", "sum", "atom_id"])
            for r in table.rows:
                w.writerow([r.j, repr(r.res), repr(r.sum), r.atom_id])
    if args.curve:
        with open(args.curve, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "residual", "sigma_k"])
            for k, res in enumerate(residuals):
                sig = sigmas[k] if k < len(sigmas) else None
                w.writerow([k, repr(res), "" if sig is None else repr(sig)])
    if args.check_recovery:
        if args.method != "momp":
            raise ValidationError("--check-recovery needs --method momp")
        report = _recovery_report(P, x, tr, args.truth)
        Path(args.check_recovery).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    print(
        f"{args.method}: {len(x)} atoms, residual {residuals[-1]:.6e}, "
        f"{trace['termination_reason']}, {wall:.3f} s"
    )
    for msg in warn:
        print(f"warning: {msg}", file=sys.stderr)
    if warn and args.strict:
        return EXIT_STRICT
    return EXIT_OK


def _recovery_report(P, x, tr, truth_path) -> dict:
    D = build_dictionary(P)
    truth = load_truth(truth_path, D) if truth_path else None
    target = truth.support if truth is not None else x.support
    probes = tr.iterates[:-1] if len(tr.iterates) > 1 else tr.iterates
    rep = recovery_condition_check(P, target, probes, D)
    audit = decrease_audit(tr)
    out = {
        "target": "truth" if truth is not None else "final_support",
        "target_ids": [a.id for a in target],
        "gram_rank": rep.rank,
        "support_size": rep.support_size,
        "full_rank": rep.full_rank,
        "all_passed": rep.all_passed,
        "probes": [dataclasses.asdict(p) for p in rep.probes],
        "decrease_audit": {"passed": audit.passed, "worst_slack": audit.worst_slack, "failures": audit.failures},
    }
    if truth is not None:
        err = x.l1_distance(truth)
        recovered = err <= TOL_RECOVERED and len(tr.iterations) <= len(truth)
        out.update(l1_error=err, recovered=recovered, outcome=recovery_outcome(rep, recovered))
    return out


def _gen(args) -> int:
    inst = plant_instance(args.dim, args.cands, args.sparsity, args.seed, distinct_rows=args.distinct_rows)
    write_matrix_csv(
        args.out_matrix,
        inst.P,
        header=f"planted dim={args.dim} cands={args.cands} sparsity={args.sparsity} seed={args.seed}",
    )
    if args.out_truth:
        truth = {
            "dim": args.dim,
            "seed": args.seed,
            "atoms": [{"id": a.id, "rows": [int(r) for r in a.rows]} for a in inst.true_support],
            "weights": [float(w) for w in inst.true_weights],
            "effective_nnz": list(inst.effective_nnz),
        }
        Path(args.out_truth).write_text(json.dumps(truth, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsepbn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decompose a transition matrix into weighted Boolean networks")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV matrix file")
    src.add_argument("--example", choices=NAMES, help="built-in benchmark matrix")
    s.add_argument("--tol-col", type=float, default=TOL_COL, help=f"column-sum tolerance (p6 ships with {P6_TOL_COL})")
    s.add_argument("--method", choices=("momp", "pg"), default="momp")
    s.add_argument("--init", choices=("zero", "random"), default="zero")
    s.add_argument("--s", type=int, default=1, help="atoms in the random start")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--profile", choices=("default", "large"), default="default")
    s.add_argument("--tol-res", type=float)
    s.add_argument("--tol-dx", type=float)
    s.add_argument("--tol-dres", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--out", type=Path, help="JSON run result")
    s.add_argument("--table", type=Path, help="res/sum CSV")
    s.add_argument("--curve", type=Path, help="per-iteration residual CSV")
    s.add_argument("--check-recovery", type=Path, help="recovery diagnostics JSON")
    s.add_argument("--truth", type=Path, help="ground truth from `gen` for --check-recovery")
    s.add_argument("--strict", action="store_true", help="exit 3 on solver warnings")
    s.set_defaults(func=_solve)

    g = sub.add_parser("gen", help="write a random planted instance")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--cands", type=int, required=True)
    g.add_argument("--sparsity", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--distinct-rows", action="store_true")
    g.add_argument("--out-matrix", type=Path, required=True)
    g.add_argument("--out-truth", type=Path)
    g.set_defaults(func=_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
