import hashlib

import numpy as np
import pytest

from sparsepbn.builtin import NAMES, load_example, raw_example
from sparsepbn.core import ColumnSumViolation, validate_stochastic

# sha256 of the two-decimal rendering, checked by hand against the source tables
CHECKSUMS = {
    "p1": "be241a2528cbdc54",
    "p2": "698ed66df43c975d",
    "p3a": "ccb7d952124e1494",
    "p3b": "72e622662ef3a115",
    "p4": "97e63e8b116a605e",
    "p5": "7711b000f53390d7",
    "p6": "9f345339ea2a7242",
}


@pytest.mark.parametrize("name", NAMES)
def test_checksum(name):
    text = "\n".join(",".join("%.2f" % v for v in row) for row in raw_example(name))
    assert hashlib.sha256(text.encode()).hexdigest()[:16] == CHECKSUMS[name]


def test_p3_perturbation():
    a, b = raw_example("p3a"), raw_example("p3b")
    assert a[3, 0] == 0.01 and b[3, 0] == 0.02
    assert a[6, 4] == 0.0


def test_p4_is_block_diagonal():
    P4 = raw_example("p4")
    np.testing.assert_array_equal(P4[:4, :4], raw_example("p2"))
    np.testing.assert_array_equal(P4[4:, 4:], raw_example("p2"))
    assert not P4[:4, 4:].any() and not P4[4:, :4].any()


def test_p6_needs_wider_tolerance():
    sums = raw_example("p6").sum(axis=0)
    assert sums[4] == pytest.approx(1.01) and sums[7] == pytest.approx(1.01)
    load_example("p6")
    with pytest.raises(ColumnSumViolation):
        validate_stochastic(raw_example("p6"))


def test_unknown_name():
    with pytest.raises(KeyError):
        raw_example("p7")
