import math

import numpy as np
import pytest

from qdeform.errors import ConstructionError, ParameterError, SizeError
from qdeform.fock import (
    classical_limit_scan,
    interior_indices,
    multimode_ops,
    q_number,
    qoscillator_ops,
    relation_residuals,
)


@pytest.mark.parametrize("q", [0.3, 0.8, 0.999999, 1.0, 1.2])
def test_q_number_recursion(q):
    # [n] = 1 + q^2 [n-1], [0] = 0
    ref = [0.0]
    for _ in range(30):
        ref.append(1 + q * q * ref[-1])
    assert np.allclose(q_number(np.arange(31), q), ref, rtol=1e-13, atol=0)


def test_number_operator_spectrum():
    b, bd = qoscillator_ops(8, 0.5, 0.9)
    assert np.allclose(np.diag(bd @ b).real, 0.5 * q_number(np.arange(8), 0.9))
    assert np.allclose(bd.matrix, b.matrix.conj().T)


def test_truncation_only_breaks_the_top_level():
    b, bd = qoscillator_ops(6, 1.0, 0.8)
    R = b @ bd - 0.64 * (bd @ b) - np.eye(6)
    assert np.max(np.abs(R[:, :5])) < 1e-14
    assert abs(R[5, 5]) > 0.1
    assert list(interior_indices(6)) == [0, 1, 2, 3, 4]


def test_multimode_interior_indices():
    idx = interior_indices(3, 2)
    assert list(idx) == [0, 1, 3, 4]


def test_three_mode_relations():
    ops = multimode_ops(3, 5, 0.7, 0.85)
    rep = relation_residuals(ops, "suqn")
    assert rep.max_residual < 1e-12
    assert set(rep.to_dict()["residuals"]) == {"annihilators", "creators", "mixed_below", "mixed_above", "diagonal"}


def test_undressed_modes_fail_loudly():
    with pytest.raises(ConstructionError, match="relation"):
        multimode_ops(2, 6, 1.0, 0.9, dressing="none")


def test_input_errors():
    with pytest.raises(SizeError):
        qoscillator_ops(1, 1.0, 0.9)
    with pytest.raises(ParameterError):
        qoscillator_ops(4, -1.0, 0.9)
    with pytest.raises(ParameterError):
        multimode_ops(2, 4, 1.0, 0.9, dressing="other")
    with pytest.raises(ParameterError):
        classical_limit_scan(1.0, 1.0, [2.0])


def test_limit_scan_table():
    scan = classical_limit_scan(2.0, 0.5, [0.1, 0.05, 0.025])
    lines = scan.to_csv().splitlines()
    assert lines[0] == "hbar,n,expectation,target,error"
    assert len(lines) == 4
    assert math.isclose(scan.target, 2.0 * (1 - math.exp(-0.25)), rel_tol=1e-15)
    errs = [r[4] for r in scan.rows]
    assert errs[0] > errs[1] > errs[2]


def test_large_beta_recovers_the_undeformed_action():
    scan = classical_limit_scan(1e6, 1.0, [0.1 / 2**k for k in range(6)])
    assert abs(scan.rows[-1][2] - 1.0) < 1e-5
