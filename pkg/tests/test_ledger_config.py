import logging
from collections import Counter

import pytest

from strongtherm.calculus import DerivativeConfig
from strongtherm.classical import ClassicalModel
from strongtherm.config import load_config, parse_config, parse_tolerance_flag
from strongtherm.errors import ConfigError
from strongtherm.ledger import CLASSICAL, INVENTORY, QUANTUM, TOL_FLOOR, Check, classical_checks, quantum_checks, resolve_tolerances
from strongtherm.models import ModelSpec

BETA = DerivativeConfig(parameter="beta")


def test_inventory_size_and_defaults():
    assert len(QUANTUM) >= 15
    assert set(INVENTORY) == set(QUANTUM) | set(CLASSICAL)
    assert all(i.tolerance > 0 and i.relation for i in INVENTORY.values())
    assert INVENTORY["jz.naive_difference"].expect == "above"


def test_check_status():
    assert Check("a", "r", 1e-9, 1e-8).status == "pass"
    assert Check("a", "r", 1e-7, 1e-8).status == "fail"
    assert Check("a", "r", float("nan"), 1e-8).status == "fail"
    assert Check("a", "r", 1e-9, 1e-8, fd_error=1e-7).status == "flag"
    assert Check("a", "r", 1e-3, 1e-6, expect="above").status == "pass"
    assert Check("a", "r", 1e-9, 1e-6, expect="above").status == "fail"
    assert Check("a", "r", float("nan"), 1e-6, skipped="why").ok


def test_glob_overrides():
    tol = resolve_tolerances({"pm.*": 1e-3})
    assert tol["pm.correlation"] == 1e-3
    assert tol["gt.relation"] == INVENTORY["gt.relation"].tolerance
    with pytest.raises(KeyError):
        resolve_tolerances({"nothing.*": 1.0})


def test_floor_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="strongtherm"):
        resolve_tolerances({"gt.relation": TOL_FLOOR / 10})
    assert not caplog.records
    with caplog.at_level(logging.WARNING, logger="strongtherm"):
        parse_config('tolerances."gt.relation" = 1e-20\n')
    assert any("floor" in r.getMessage() for r in caplog.records)


def _points(checks):
    return Counter(c.name for c in checks)


@pytest.mark.parametrize("J", [0.0, 0.3])
def test_each_quantum_identity_once_per_point(J):
    checks = quantum_checks(ModelSpec(couplings=(0.5,), J=J), 1.0, resolve_tolerances(None), BETA, 0, {})
    assert _points(checks) == Counter(list(QUANTUM))
    assert all(c.ok for c in checks)


def test_each_classical_identity_once_per_point():
    checks = classical_checks(ClassicalModel(), 1.0, 1.0, resolve_tolerances(None), BETA, {})
    assert _points(checks) == Counter(list(CLASSICAL))
    assert all(c.ok for c in checks)


def test_defaults():
    cfg = parse_config("")
    assert cfg.model.kind == "two-qubit"
    assert len(cfg.betas) == 4
    assert cfg.quantum_points()[0] == {"g_scale": 1.0, "J": 0.0, "beta": cfg.betas[0]}


def test_full_config(tmp_path):
    text = """
model.kind = "coupled-oscillators"
model.fock_dim = 8
model.couplings = [0.5]
grid.beta.values = [1, 2.5]
grid.g-scale = [0.0, 1.0]
grid.J = [0.0, 0.2]
grid.P = [0.5]
tolerances."pm.*" = 1e-4
outputs.csv = "out.csv"
seed = 11
fd.h_rel = 1e-3
sweep.kind = "gt"
classical.mu = 0.2
classical.order = 96
"""
    p = tmp_path / "run.toml"
    p.write_text(text)
    cfg = load_config(p)
    assert cfg.model.omega_b == (2.0,)
    assert cfg.betas == (1.0, 2.5)
    assert len(cfg.quantum_points()) == 8
    assert cfg.spec_at(0.0, 0.2).couplings == (0.0,)
    assert cfg.tolerances["pm.correlation"] == 1e-4
    assert cfg.outputs == {"csv": "out.csv"}
    assert cfg.seed == 11 and cfg.sweep_kind == "gt"
    assert cfg.classical.mu == 0.2 and cfg.classical.order == 96
    assert cfg.classical_points() == [{"P": 0.5, "beta": 1.0}, {"P": 0.5, "beta": 2.5}]


def test_linear_beta_grid():
    cfg = parse_config('grid.beta.from = 1\ngrid.beta.to = 3\ngrid.beta.steps = 3\ngrid.beta.spacing = "linear"\n')
    assert cfg.betas == (1.0, 2.0, 3.0)


@pytest.mark.parametrize(
    "text, key, line",
    [
        ("seed = 1\ngrid.g-scale = []\n", "grid.g-scale", 2),
        ('model.kind = "three-qubit"\n', "model.kind", 1),
        ('\n\nmodel.omega_s = "1.0"\n', "model.omega_s", 3),
        ("grid.beta.values = [1.0, -2.0]\n", "grid.beta.values", 1),
        ("model.colour = 3\n", "model.colour", 1),
        ('tolerances."nope.*" = 1e-3\n', "tolerances.nope.*", 1),
        ('sweep.kind = "fast"\n', "sweep.kind", 1),
        ("grid.beta.steps = 0\n", "grid.beta.steps", 1),
    ],
)
def test_config_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key
    assert exc.value.line == line
    assert key in str(exc.value)


def test_malformed_toml_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("seed = 1\nmodel.kind = \n")
    assert exc.value.line == 2


def test_model_errors_become_config_errors():
    with pytest.raises(ConfigError):
        parse_config("model.couplings = [0.1, 0.2]\n")
    with pytest.raises(ConfigError):
        parse_config("classical.lam = 5.0\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml")


def test_tolerance_flag():
    assert parse_tolerance_flag("gt.*=1e-3") == ("gt.*", 1e-3)
    for bad in ("gt.relation", "gt.relation=abc", "gt.relation=-1"):
        with pytest.raises(ConfigError):
            parse_tolerance_flag(bad)


def test_runtime_overrides():
    cfg = parse_config("").with_overrides({"jz.*": 1e-2}, seed=5)
    assert cfg.tolerances["jz.gauge"] == 1e-2 and cfg.seed == 5
    with pytest.raises(ConfigError):
        cfg.with_overrides({"zz": 1.0})
