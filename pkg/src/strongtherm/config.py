"""Run configuration: a flat TOML file of dotted keys.

Example::

    model.kind = "two-qubit"
    model.couplings = [1.0]
    grid.beta.from = 0.1
    grid.beta.to = 50.0
    grid.beta.steps = 8
    grid.beta.spacing = "log"
    grid.g-scale = [0.0, 0.5, 1.0]
    tolerances."pm.entropy_additivity" = 1e-9
    seed = 7

Values are never coerced: a string where a number is expected is an error.
Integers are accepted for float keys since the conversion is exact.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .calculus import DerivativeConfig
from .classical import ClassicalModel
from .errors import ConfigError, StrongThermError
from .ledger import INVENTORY, resolve_tolerances
from .models import KINDS, ModelSpec

DEFAULT_OMEGA_B = {"two-qubit": 1.0, "coupled-oscillators": 2.0, "spin-boson": 2.0}
SWEEP_KINDS = ("gt", "pm", "jz", "canonical")


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    betas: tuple[float, ...]
    g_scales: tuple[float, ...]
    Js: tuple[float, ...]
    Ps: tuple[float, ...]
    tolerance_overrides: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    fd: DerivativeConfig = DerivativeConfig(parameter="beta")
    classical: ClassicalModel | None = None
    sweep_kind: str = "pm"

    @property
    def tolerances(self) -> dict[str, float]:
        return resolve_tolerances(self.tolerance_overrides)

    def spec_at(self, g_scale: float, J: float) -> ModelSpec:
        m = self.model
        return ModelSpec(
            kind=m.kind,
            omega_s=m.omega_s,
            omega_b=m.omega_b,
            couplings=tuple(g_scale * c for c in m.couplings),
            fock_dim=m.fock_dim,
            J=J,
            drive_operator=m.drive_operator,
        )

    def quantum_points(self) -> list[dict]:
        return [
            {"g_scale": g, "J": J, "beta": b} for g in self.g_scales for J in self.Js for b in self.betas
        ]

    def classical_points(self) -> list[dict]:
        return [{"P": P, "beta": b} for P in self.Ps for b in self.betas]

    def with_overrides(self, tolerances: dict | None = None, seed: int | None = None) -> "RunConfig":
        merged = {**self.tolerance_overrides, **(tolerances or {})}
        try:
            resolve_tolerances(tolerances, warn=True)
        except KeyError as exc:
            raise ConfigError(f"no identity matches tolerance key {exc.args[0]!r}", key=f"tolerances.{exc.args[0]}")
        return replace(self, tolerance_overrides=merged, seed=self.seed if seed is None else seed)


class _Reader:
    """Typed access to the nested table, remembering which keys were consumed."""

    def __init__(self, data: dict, text: str):
        self.flat = _flatten(data)
        self.text = text
        self.used: set[str] = set()

    def line_of(self, key: str) -> int | None:
        splits = [key.split(".")]
        head, _, rest = key.partition(".")
        if head in ("tolerances", "outputs"):
            splits.append([head, rest])  # identity names are usually written as one quoted segment
        for parts in splits:
            # dotted key as written, tolerating whitespace and quotes around segments
            seg = r"\s*\.\s*".join(r'(?:"{0}"|{0})'.format(re.escape(p)) for p in parts)
            pat = re.compile(rf"^\s*{seg}\s*=")
            for i, line in enumerate(self.text.splitlines(), 1):
                if pat.match(line):
                    return i
        return None

    def fail(self, key: str, msg: str) -> ConfigError:
        return ConfigError(msg, key=key, line=self.line_of(key))

    def get(self, key: str, kind: str, default: Any = None):
        if key not in self.flat:
            return default
        self.used.add(key)
        v = self.flat[key]
        if kind == "float":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise self.fail(key, f"{key} must be a number, got {type(v).__name__}")
            return float(v)
        if kind == "int":
            if isinstance(v, bool) or not isinstance(v, int):
                raise self.fail(key, f"{key} must be an integer, got {type(v).__name__}")
            return v
        if kind == "str":
            if not isinstance(v, str):
                raise self.fail(key, f"{key} must be a string, got {type(v).__name__}")
            return v
        if kind == "floats":
            if not isinstance(v, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
                raise self.fail(key, f"{key} must be a list of numbers")
            return tuple(float(x) for x in v)
        if kind == "strs":
            if not isinstance(v, list) or any(not isinstance(x, str) for x in v):
                raise self.fail(key, f"{key} must be a list of strings")
            return tuple(v)
        raise AssertionError(kind)


def _flatten(data: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict) and not key.startswith("tolerances") and not key.startswith("outputs"):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, dict) and key in ("tolerances", "outputs"):
            out.update(_flatten_leaf(v, key + "."))
        else:
            out[key] = v
    return out


def _flatten_leaf(data: dict, prefix: str) -> dict[str, Any]:
    # identity names contain dots; rejoin nested tables produced by unquoted keys
    out = {}
    for k, v in data.items():
        if isinstance(v, dict):
            out.update(_flatten_leaf(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _beta_grid(r: _Reader) -> tuple[float, ...]:
    values = r.get("grid.beta.values", "floats")
    if values is not None:
        if not values:
            raise r.fail("grid.beta.values", "grid.beta.values is empty")
        if any(b <= 0 for b in values):
            raise r.fail("grid.beta.values", "inverse temperatures must be positive")
        return values
    lo = r.get("grid.beta.from", "float", 0.1)
    hi = r.get("grid.beta.to", "float", 10.0)
    steps = r.get("grid.beta.steps", "int", 4)
    spacing = r.get("grid.beta.spacing", "str", "log")
    if lo <= 0 or hi < lo:
        raise r.fail("grid.beta.from", f"need 0 < grid.beta.from <= grid.beta.to, got {lo}, {hi}")
    if steps < 1:
        raise r.fail("grid.beta.steps", "grid.beta.steps must be at least 1")
    if spacing == "log":
        grid = np.geomspace(lo, hi, steps)
    elif spacing == "linear":
        grid = np.linspace(lo, hi, steps)
    else:
        raise r.fail("grid.beta.spacing", f"grid.beta.spacing must be 'log' or 'linear', got {spacing!r}")
    return tuple(float(b) for b in grid)


def _nonempty(r: _Reader, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
    v = r.get(key, "floats", default)
    if not v:
        raise r.fail(key, f"{key} is empty; give at least one value")
    return v


def parse_config(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed config: {exc}", line=int(m.group(1)) if m else None) from exc
    r = _Reader(data, text)

    kind = r.get("model.kind", "str", "two-qubit")
    if kind not in KINDS:
        raise r.fail("model.kind", f"model.kind must be one of {KINDS}, got {kind!r}")
    try:
        omega_b = r.get("model.omega_b", "floats", (DEFAULT_OMEGA_B[kind],))
        couplings = r.get("model.couplings", "floats", (1.0,) * len(omega_b))
        model = ModelSpec(
            kind=kind,
            omega_s=r.get("model.omega_s", "float", 1.0),
            omega_b=omega_b,
            couplings=couplings,
            fock_dim=r.get("model.fock_dim", "int", 12),
            drive_operator=r.get("model.drive_operator", "str", ModelSpec.drive_operator),
        )
    except ConfigError:
        raise
    except StrongThermError as exc:
        raise ConfigError(str(exc), key="model") from exc

    betas = _beta_grid(r)
    g_scales = _nonempty(r, "grid.g-scale", (1.0,))
    Js = _nonempty(r, "grid.J", (0.0,))
    Ps = _nonempty(r, "grid.P", (1.0,))

    tol = {}
    for key in [k for k in r.flat if k.startswith("tolerances.")]:
        name = key[len("tolerances."):]
        value = r.get(key, "float")
        if value <= 0:
            raise r.fail(key, f"{key} must be positive")
        tol[name] = value
    try:
        resolve_tolerances(tol, warn=True)
    except KeyError as exc:
        raise r.fail(f"tolerances.{exc.args[0]}", f"no identity matches tolerance key {exc.args[0]!r}")

    outputs = {}
    for key in [k for k in r.flat if k.startswith("outputs.")]:
        outputs[key[len("outputs."):]] = r.get(key, "str")

    seed = r.get("seed", "int", 0)
    try:
        fd = DerivativeConfig(
            h_rel=r.get("fd.h_rel", "float", 1e-4), levels=r.get("fd.levels", "int", 3), parameter="beta"
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="fd") from exc

    sweep_kind = r.get("sweep.kind", "str", "pm")
    if sweep_kind not in SWEEP_KINDS:
        raise r.fail("sweep.kind", f"unknown sweep kind {sweep_kind!r}; expected one of {SWEEP_KINDS}")

    classical = None
    if any(k.startswith("classical.") for k in r.flat):
        cl = {}
        for name in ("omega_s", "kappa", "v0", "a", "lam", "mu"):
            v = r.get(f"classical.{name}", "float")
            if v is not None:
                cl[name] = v
        for name in ("omega_b", "couplings"):
            v = r.get(f"classical.{name}", "floats")
            if v is not None:
                cl[name] = v
        order = r.get("classical.order", "int")
        if order is not None:
            cl["order"] = order
        try:
            classical = ClassicalModel(**cl)
        except (StrongThermError, ValueError) as exc:
            raise ConfigError(str(exc), key="classical") from exc

    unknown = sorted(set(r.flat) - r.used)
    if unknown:
        raise r.fail(unknown[0], f"unknown config key {unknown[0]!r}")

    return RunConfig(
        model=model,
        betas=betas,
        g_scales=g_scales,
        Js=Js,
        Ps=Ps,
        tolerance_overrides=tol,
        outputs=outputs,
        seed=seed,
        fd=fd,
        classical=classical,
        sweep_kind=sweep_kind,
    )


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def parse_tolerance_flag(item: str) -> tuple[str, float]:
    name, sep, value = item.partition("=")
    if not sep:
        raise ConfigError(f"--tol expects name=value, got {item!r}", key=item)
    try:
        v = float(value)
    except ValueError:
        raise ConfigError(f"--tol value for {name!r} is not a number: {value!r}", key=name) from None
    if v <= 0:
        raise ConfigError(f"--tol value for {name!r} must be positive", key=name)
    return name.strip(), v


__all__ = ["RunConfig", "parse_config", "load_config", "parse_tolerance_flag", "INVENTORY", "SWEEP_KINDS"]
