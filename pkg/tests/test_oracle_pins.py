"""The frozen reference values still follow from the independent oracle."""

import pytest

import golden
import oracle


def _close(frozen, fresh, tol):
    for key, value in frozen.items():
        assert fresh[key] == pytest.approx(value, abs=tol), key


def test_two_qubit_pins():
    _close(golden.TWO_QUBIT, oracle.quantum_point(oracle.two_qubit(g=0.5), 1.0), 1e-12)


def test_driven_pins():
    _close(golden.TWO_QUBIT_DRIVEN, oracle.quantum_point(oracle.two_qubit(g=0.5, J=0.3), 1.0), 1e-12)


@pytest.mark.parametrize("beta", [10.0, 20.0, 30.0])
def test_oscillator_pins(beta):
    m = oracle.oscillators()
    assert oracle.mean_force(m, beta)["S_vN"] == pytest.approx(golden.OSCILLATOR_S_VN[beta], abs=1e-12)
    S_s = beta**2 * oracle.d5(lambda b: oracle.mean_force(m, b)["F_star"], beta, 1e-2)
    assert S_s == pytest.approx(golden.OSCILLATOR_S_S[beta], abs=1e-12)


def test_classical_pins():
    _close(golden.CLASSICAL_LAM_04, oracle.classical_gaussian(1.0, 1.0, lam=0.4), 1e-14)
    _close(golden.CLASSICAL_LAM_0, oracle.classical_gaussian(1.0, 1.0, lam=0.0), 1e-14)
