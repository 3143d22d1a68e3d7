"""Sparse probabilistic Boolean network reconstruction by matching pursuit.

Set ``SPARSEPBN_NUM_THREADS`` before the first import to cap the thread
pools of the linear algebra backend.
"""

import os as _os

_threads = _os.environ.get("SPARSEPBN_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .core import (  # noqa: E402
    ColumnSumViolation,
    SparseSolution,
    StochasticMatrix,
    StoppingCriteria,
    ValidationError,
    validate_stochastic,
)
from .dictionary import Atom, ColumnSupportDictionary, build_dictionary, correlation_argmax  # noqa: E402
from .momp import InitSpec, RunTrace, Termination, momp_run  # noqa: E402
from .simplexls import check_kkt, simplex_project, solve_simplex_ls  # noqa: E402
from .analysis import decrease_audit, plant_instance, recovery_condition_check, res_sum_table  # noqa: E402
from .baselines import PgConfig, omp_run, pg_run  # noqa: E402
from .builtin import load_example  # noqa: E402

__all__ = [
    "Atom",
    "ColumnSumViolation",
    "ColumnSupportDictionary",
    "InitSpec",
    "PgConfig",
    "RunTrace",
    "SparseSolution",
    "StochasticMatrix",
    "StoppingCriteria",
    "Termination",
    "ValidationError",
    "build_dictionary",
    "check_kkt",
    "correlation_argmax",
    "decrease_audit",
    "load_example",
    "momp_run",
    "omp_run",
    "pg_run",
    "plant_instance",
    "recovery_condition_check",
    "res_sum_table",
    "simplex_project",
    "solve_simplex_ls",
    "validate_stochastic",
]
