import math

import numpy as np
import pytest

import golden
from strongtherm.gibbs import canonical_report
from strongtherm.mean_force import MeanForce
from strongtherm.models import ModelSpec, build
from strongtherm.operators import SubsystemSplit
from strongtherm.thermo_pm import gt_pm_energy_gap, mutual_information, pm_report

OSC = ModelSpec(kind="coupled-oscillators", omega_b=(2.0,), couplings=(1.0,))


def report(spec, beta):
    return pm_report(MeanForce(build(spec)), beta)


def test_decoupled_limit():
    r = report(ModelSpec(couplings=(0.0,)), 0.8)
    c = canonical_report(np.diag([0.5, -0.5]), 0.8)
    assert r.U_s_pm == pytest.approx(c.U, abs=1e-8)
    assert r.S_s == pytest.approx(c.S, abs=1e-8)
    assert r.C_s_pm == pytest.approx(c.C, abs=1e-5)
    assert r.I_sb == pytest.approx(0.0, abs=1e-12)


def test_two_qubit_values():
    r = report(ModelSpec(couplings=(0.5,)), 1.0)
    assert r.U_s_pm == pytest.approx(golden.TWO_QUBIT["U_pm"], abs=1e-8)
    assert r.S_s == pytest.approx(golden.TWO_QUBIT["S_s"], abs=1e-8)
    assert r.C_s_pm == pytest.approx(golden.TWO_QUBIT["C_pm"], abs=1e-6)
    assert r.I_sb == pytest.approx(golden.TWO_QUBIT["I_sb"], abs=1e-10)


@pytest.mark.parametrize("beta", [0.1, 1.0, 10.0, 50.0])
@pytest.mark.parametrize("g", [0.2, 1.0])
def test_pm_identities(g, beta):
    r = report(ModelSpec(couplings=(g,)), beta)
    assert abs(r.S_s - r.S_s_expectation) < 1e-6
    assert abs(r.U_s_pm - r.decomposition.total) < 1e-6
    assert r.additivity_residual < 1e-8
    assert r.mi_decomposition_residual < 1e-8
    assert abs(r.I_sb - r.I_sb_relative_entropy) < 1e-8
    assert r.I_sb > -1e-10
    assert r.C_spread < 1e-5
    assert r.corr_residual < 1e-6


@pytest.mark.parametrize("beta", [10.0, 20.0, 30.0])
def test_oscillator_low_temperature(beta):
    r = report(OSC, beta)
    assert r.S_vN == pytest.approx(golden.OSCILLATOR_S_VN[beta], abs=1e-9)
    # the oracle's nested stencil limits agreement to ~1e-9 here
    assert r.S_s == pytest.approx(golden.OSCILLATOR_S_S[beta], abs=1e-8)
    assert r.S_s < r.S_vN


def test_product_state_has_no_mutual_information():
    rho = np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6])).astype(complex)
    for route in ("relative-entropy", "entropies"):
        assert mutual_information(rho, SubsystemSplit((2, 2)), route) == pytest.approx(0.0, abs=1e-12)


def test_bell_state():
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    assert mutual_information(rho, SubsystemSplit((2, 2)), "entropies") == pytest.approx(2 * math.log(2), abs=1e-12)
    with pytest.raises(ValueError):
        mutual_information(rho, SubsystemSplit((2, 2)), "bogus")


def test_mutual_information_routes_agree(rng):
    X = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = X @ X.conj().T
    rho /= np.trace(rho)
    split = SubsystemSplit((2, 3))
    a = mutual_information(rho, split, "relative-entropy")
    b = mutual_information(rho, split, "entropies")
    assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("spec", [ModelSpec(couplings=(0.8,)), OSC], ids=["qubit", "oscillator"])
def test_capacity_gap_from_excess_energy(spec):
    gap, diff, err = gt_pm_energy_gap(MeanForce(build(spec)), 1.0)
    assert abs(gap - diff) < 1e-4
    assert err < 1e-4
