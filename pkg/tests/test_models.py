import math

import numpy as np
import pytest

from strongtherm.errors import ModelError, TruncationError
from strongtherm.gibbs import log_partition
from strongtherm.models import ModelSpec, build, number_op, position_op, truncation_check


def test_uncoupled_two_qubit_has_zero_interaction():
    m = build(ModelSpec(couplings=(0.0,)))
    assert np.count_nonzero(m.H_i) == 0
    assert m.H_i.shape == (4, 4)


def test_number_operator():
    np.testing.assert_allclose(number_op(4), np.diag([0, 1, 2, 3]))


def test_position_operator_entries():
    x = position_op(3)
    assert x[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert x[1, 2] == pytest.approx(1.0)
    assert x[0, 2] == 0


def test_composite_blocks_are_hermitian():
    m = build(ModelSpec(kind="coupled-oscillators", omega_b=(2.0,), couplings=(1.0,), fock_dim=6, J=0.2))
    for op in (m.H_s, m.H_i, m.H_b, m.A_b, m.H_c):
        np.testing.assert_allclose(op, op.conj().T)
    assert m.d_s == 6 and m.d_b == 6


def test_two_bath_modes():
    m = build(ModelSpec(kind="spin-boson", omega_b=(1.0, 2.0), couplings=(0.3, 0.1), fock_dim=4))
    assert m.split.dims == (2, 4, 4)
    assert m.d_b == 16


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="three-qubit"),
        dict(omega_b=(1.0, 1.0), couplings=(0.5,)),
        dict(omega_s=-1.0),
        dict(omega_b=(1.0, 1.0), couplings=(0.1, 0.1)),
        dict(kind="coupled-oscillators", omega_b=(1.0,) * 3, couplings=(0.1,) * 3, fock_dim=10),
        dict(drive_operator="momentum"),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ModelError):
        ModelSpec(**kwargs)


def _bath_log_z(beta):
    return lambda model: log_partition(model.bath_local(model.H_b), beta)


FREE_BOSON = ModelSpec(kind="spin-boson", couplings=(0.0,), fock_dim=2)


def test_truncation_tail_bound():
    beta = 5.0
    d = truncation_check(FREE_BOSON, _bath_log_z(beta), 1e-6)
    # tail weight of the truncated geometric series
    assert math.exp(-beta * d) < 1e-6
    closed = -math.log1p(-math.exp(-beta))
    assert log_partition(number_op(d), beta) == pytest.approx(closed, rel=1e-6)


def test_truncation_grows_with_temperature():
    assert truncation_check(FREE_BOSON, _bath_log_z(0.5), 1e-6) > truncation_check(FREE_BOSON, _bath_log_z(5.0), 1e-6)


def test_truncation_gives_up_at_the_cap(monkeypatch):
    monkeypatch.setattr("strongtherm.models.MAX_DIM", 100)
    with pytest.raises(TruncationError) as exc:
        truncation_check(FREE_BOSON, _bath_log_z(1e-3), 1e-12)
    assert exc.value.trace


def test_truncation_rejects_qubits():
    with pytest.raises(ModelError):
        truncation_check(ModelSpec(), _bath_log_z(1.0), 1e-6)
