import numpy as np
import pytest

import golden
from strongtherm.drive import (
    DrivenComposite,
    gauge_check,
    jz_bare,
    jz_partial_molar,
    local_operators,
    naive_enthalpy_difference,
    zero_mean_gauge,
)
from strongtherm.errors import ModelError, SingularOperatorError
from strongtherm.mean_force import MeanForce
from strongtherm.models import ModelSpec, build


def driven(g=0.5, J=0.3, **kw):
    return DrivenComposite(build(ModelSpec(couplings=(g,), J=J, **kw)))


def test_bare_needs_a_drive():
    with pytest.raises(ModelError):
        jz_bare(driven(J=0.0), 1.0)


def test_decoupled_bare_operator_is_scalar():
    r = jz_bare(driven(g=0.0), 1.0)
    off = r.A_s_op - np.trace(r.A_s_op) / 2 * np.eye(2)
    assert np.max(np.abs(off)) < 1e-10


def test_two_qubit_driven_values():
    d = golden.TWO_QUBIT_DRIVEN
    r = jz_partial_molar(driven(), 1.0)
    assert r.A_s_pm == pytest.approx(d["A_pm"], abs=1e-8)
    assert r.A_s_bare == pytest.approx(d["A_bare"], abs=1e-12)
    assert r.A_c == pytest.approx(d["A_c"], abs=1e-12)
    assert r.A_b == pytest.approx(d["A_b"], abs=1e-12)
    assert r.A_s_pm == pytest.approx(r.A_c - r.A_b, abs=1e-6)
    assert abs(r.A_s_bare - r.A_s_pm) > 1e-2


def test_bare_entropy_matches_von_neumann():
    r = jz_bare(driven(), 2.0)
    assert r.residual_entropy < 1e-8


def test_undriven_reduces_to_mean_force():
    r = jz_partial_molar(driven(J=0.0), 1.0)
    assert np.isnan(r.A_s_bare)
    assert r.G_s == pytest.approx(golden.TWO_QUBIT["F_star"], abs=1e-12)
    assert r.S_s == pytest.approx(golden.TWO_QUBIT["S_s"], abs=1e-8)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("J", [0.0, 0.3])
def test_partial_molar_contracts(J, beta):
    r = jz_partial_molar(driven(J=J), beta)
    assert r.gibbs_residual < 1e-12
    assert abs(r.S_s - (r.S_c - r.S_b)) < 1e-8
    assert abs(r.S_s - beta * (r.H_enthalpy_s - r.G_s)) < 1e-6
    assert abs(r.H_enthalpy_s - (r.H_enthalpy_c - r.H_enthalpy_b)) < 1e-6
    assert abs(r.S_c - r.S_c_spectral) < 1e-6
    assert abs(r.S_b - r.S_b_spectral) < 1e-6
    for key in ("residual_U", "residual_A", "residual_H"):
        assert r.local_checks[key] < 1e-8


def test_decoupled_local_operators():
    mf = MeanForce(build(ModelSpec(couplings=(0.0,), J=0.3)))
    lo = local_operators(mf, 1.0)
    np.testing.assert_allclose(lo.U_s_op, mf.H_s, atol=1e-10)
    np.testing.assert_allclose(lo.A_s_op, np.zeros((2, 2)), atol=1e-10)


def test_local_operators_are_not_hermitian_in_general():
    lo = local_operators(MeanForce(build(ModelSpec(couplings=(0.8,), J=0.3))), 1.0)
    assert lo.asymmetry_U_i > 1e-6
    np.testing.assert_allclose(lo.U_s_op, lo.U_s_op.conj().T)


def test_naive_difference_is_not_the_enthalpy():
    mf = MeanForce(build(ModelSpec(couplings=(0.8,), J=0.3)))
    r = jz_partial_molar(DrivenComposite(mf.model), 1.0)
    assert abs(naive_enthalpy_difference(mf, 1.0) - r.H_enthalpy_s) > 1e-6


@pytest.mark.parametrize("kind", ["random", "diagonal", "off-diagonal"])
def test_gauge_freedom(kind, rng):
    mf = MeanForce(build(ModelSpec(couplings=(0.8,), J=0.3)))
    lo = local_operators(mf, 1.0)
    rho = mf.rho_s(1.0)
    for _ in range(20):
        Lam = zero_mean_gauge(rho, rng, kind)
        np.testing.assert_allclose(Lam, Lam.conj().T)
        assert gauge_check(lo.U_s_op, rho, Lam) < 1e-12


def test_gauge_kind_validation(rng):
    with pytest.raises(ValueError):
        zero_mean_gauge(np.eye(2) / 2, rng, "nope")


def test_low_temperature_local_operators_are_singular():
    # decoupled: M is proportional to exp(-beta H_s), condition number exp(beta omega_s)
    with pytest.raises(SingularOperatorError) as exc:
        local_operators(MeanForce(build(ModelSpec(couplings=(0.0,), J=0.3))), 50.0)
    assert exc.value.condition_number > 1e13


def test_low_temperature_report_marks_skip():
    r = jz_partial_molar(driven(g=0.0), 50.0)
    assert np.isnan(r.local_checks["residual_U"])
    assert r.gibbs_residual < 1e-12
