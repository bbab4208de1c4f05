"""Grid evaluation behind the command line: sweep rows, identity ledgers and golden snapshots."""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .classical import ClassicalThermo, bare_report, pm_report as classical_pm, representation_gaps
from .config import RunConfig
from .drive import jz_partial_molar
from .errors import ModelError
from .gibbs import canonical_report
from .ledger import classical_checks, driven, quantum_checks
from .thermo_gt import gt_report
from .thermo_pm import pm_report

E, INV_E, K_B, ONE = "[E]", "[1/E]", "[k_B]", "[1]"
SIG_CSV = 17
SIG_GOLDEN = 15
GOLDEN_RTOL = 1e-9
GOLDEN_ATOL = 1e-14


def parallel_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    """Ordered map; ``jobs > 1`` fans out over worker processes."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- sweep rows --------------------------------------------------------------

QUANTUM_KEYS = [("g_scale", ONE), ("J", E), ("beta", INV_E)]

COLUMNS = {
    "canonical": [("Z", ONE), ("F", E), ("U", E), ("S", K_B), ("C", K_B)],
    "gt": [
        ("U_s_gt", E),
        ("S_vN", K_B),
        ("F_c", E),
        ("F_star", E),
        ("mean_delta", E),
        ("mean_ddelta", E + "/" + INV_E),
        ("d_mean_delta", E + "/" + INV_E),
        ("C_s_gt", K_B),
        ("C_s_gt_bracket", K_B),
        ("S_nonadditivity", K_B),
        ("residual_relation", E),
    ],
    "pm": [
        ("F_star", E),
        ("U_s_pm", E),
        ("S_s", K_B),
        ("S_vN", K_B),
        ("entropy_gap", K_B),
        ("C_s_pm", K_B),
        ("C_s_pm_fd_error", K_B),
        ("C_route_b", K_B),
        ("C_route_c", K_B),
        ("C_s_gt", K_B),
        ("U_s_gt", E),
        ("S_c", K_B),
        ("S_b", K_B),
        ("I_sb", K_B),
        ("residual_additivity", K_B),
    ],
    "jz": [
        ("A_s_bare", ONE),
        ("A_s_pm", ONE),
        ("A_c", ONE),
        ("A_b", ONE),
        ("H_enthalpy_s", E),
        ("U_s", E),
        ("G_s", E),
        ("S_s", K_B),
        ("S_vN", K_B),
        ("residual_gibbs", E),
    ],
}

CLASSICAL_KEYS = [("P", E + "/[V]"), ("beta", INV_E)]
CLASSICAL_COLUMNS = [
    ("V_bare", "[V]"),
    ("U_bare", E),
    ("H_bare", E),
    ("S_bare", K_B),
    ("V_pm", "[V]"),
    ("U_pm", E),
    ("H_pm", E),
    ("S_pm", K_B),
    ("G_s", E),
    ("gap_V", "[V]"),
    ("gap_U", E),
    ("gap_H", E),
    ("gap_S", K_B),
    ("bare_entropy_gap", K_B),
]


def sweep_row(task: tuple[str, RunConfig, dict]) -> dict:
    kind, cfg, point = task
    spec = cfg.spec_at(point["g_scale"], point["J"])
    beta = point["beta"]
    flags = []
    if kind == "canonical":
        r = canonical_report(driven(spec).at_J().H_s, beta)
        values = {"Z": r.Z, "F": r.F, "U": r.U, "S": r.S, "C": r.C}
    elif kind == "gt":
        r = gt_report(driven(spec).at_J(), beta, cfg.fd)
        values = {name: getattr(r, name) for name, _ in COLUMNS["gt"] if name != "residual_relation"}
        values["residual_relation"] = r.residual_relation
        if r.C_s_gt < 0:
            flags.append("C_gt<0")
    elif kind == "pm":
        mf = driven(spec).at_J()
        r = pm_report(mf, beta, cfg.fd)
        g = gt_report(mf, beta, cfg.fd)
        values = {
            "F_star": r.F_star,
            "U_s_pm": r.U_s_pm,
            "S_s": r.S_s,
            "S_vN": r.S_vN,
            "entropy_gap": r.entropy_gap,
            "C_s_pm": r.C_s_pm,
            "C_s_pm_fd_error": r.fd_error["C_a"],
            "C_route_b": r.C_routes[1],
            "C_route_c": r.C_routes[2],
            "C_s_gt": g.C_s_gt,
            "U_s_gt": g.U_s_gt,
            "S_c": r.S_c,
            "S_b": r.S_b,
            "I_sb": r.I_sb,
            "residual_additivity": r.additivity_residual,
        }
        if r.C_s_pm < 0:
            flags.append("C_pm<0" if r.C_s_pm < -r.fd_error["C_a"] else "C_pm<0(within-fd-error)")
    elif kind == "jz":
        r = jz_partial_molar(driven(spec), beta, cfg.fd)
        values = {name: getattr(r, name) for name, _ in COLUMNS["jz"] if name != "residual_gibbs"}
        values["residual_gibbs"] = r.gibbs_residual
        if point["J"] == 0.0:
            flags.append("bare-undefined")
        if math.isnan(r.local_checks["residual_U"]):
            flags.append("local-ops-singular")
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    return {**point, **{k: float(v) for k, v in values.items()}, "flag": ";".join(flags)}


def classical_row(task: tuple[RunConfig, dict]) -> dict:
    cfg, point = task
    thermo = ClassicalThermo(cfg.classical)
    P, beta = point["P"], point["beta"]
    p = classical_pm(thermo, P, beta, cfg.fd)
    row = {**point, "V_pm": p.V, "U_pm": p.U, "H_pm": p.H, "S_pm": p.S, "G_s": p.G_s}
    flags = []
    try:
        b = bare_report(thermo, P, beta, cfg.fd)
    except ModelError:
        nan = math.nan
        row.update(V_bare=nan, U_bare=nan, H_bare=nan, S_bare=nan, gap_V=nan, gap_U=nan, gap_H=nan, gap_S=nan)
        row["bare_entropy_gap"] = nan
        flags.append("bare-undefined")
    else:
        gaps = representation_gaps(b, p)
        row.update(V_bare=b.V, U_bare=b.U, H_bare=b.H, S_bare=b.S)
        row.update(gap_V=gaps.V, gap_U=gaps.U, gap_H=gaps.H, gap_S=gaps.S, bare_entropy_gap=b.entropy_gap)
    row["flag"] = ";".join(flags)
    return row


def run_sweep(cfg: RunConfig, kind: str, jobs: int = 1) -> list[dict]:
    return parallel_map(sweep_row, [(kind, cfg, p) for p in cfg.quantum_points()], jobs)


def run_classical(cfg: RunConfig, jobs: int = 1) -> list[dict]:
    if cfg.classical is None:
        raise ValueError("configuration has no classical.* section")
    return parallel_map(classical_row, [(cfg, p) for p in cfg.classical_points()], jobs)


def _fmt(v, sig: int) -> str:
    if isinstance(v, str):
        return v
    return f"{v:.{sig}g}"


def format_csv(rows: list[dict], columns: list[tuple[str, str]], timestamp: str | None = None) -> str:
    """CSV text with a timestamp comment line and unit-annotated headers."""
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    buf = io.StringIO()
    buf.write(f"# generated {stamp} backend={kernels.BACKEND}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{name} {unit}" for name, unit in columns] + ["flag"])
    for row in rows:
        w.writerow([_fmt(row[name], SIG_CSV) for name, _ in columns] + [row["flag"]])
    return buf.getvalue()


def sweep_csv(rows: list[dict], kind: str, timestamp: str | None = None) -> str:
    return format_csv(rows, QUANTUM_KEYS + COLUMNS[kind], timestamp)


def classical_csv(rows: list[dict], timestamp: str | None = None) -> str:
    return format_csv(rows, CLASSICAL_KEYS + CLASSICAL_COLUMNS, timestamp)


def negative_capacity_summary(rows: list[dict]) -> list[str]:
    out = []
    for r in rows:
        if r["C_s_pm"] < 0:
            noise = " (within fd error)" if -r["C_s_pm"] <= r["C_s_pm_fd_error"] else ""
            out.append(
                f"g_scale={r['g_scale']:.6g} J={r['J']:.6g} beta={r['beta']:.6g} "
                f"C_s_pm={r['C_s_pm']:.6g} fd_error={r['C_s_pm_fd_error']:.2g}{noise}"
            )
    return out


# --- identity ledger ---------------------------------------------------------


def _quantum_ledger(task: tuple[RunConfig, dict]) -> list[dict]:
    cfg, point = task
    spec = cfg.spec_at(point["g_scale"], point["J"])
    checks = quantum_checks(spec, point["beta"], cfg.tolerances, cfg.fd, cfg.seed, point)
    return [c.to_dict() for c in checks]


def _classical_ledger(task: tuple[RunConfig, dict]) -> list[dict]:
    cfg, point = task
    checks = classical_checks(cfg.classical, point["P"], point["beta"], cfg.tolerances, cfg.fd, point)
    return [c.to_dict() for c in checks]


def run_validation(cfg: RunConfig, jobs: int = 1) -> dict:
    per_point = parallel_map(_quantum_ledger, [(cfg, p) for p in cfg.quantum_points()], jobs)
    if cfg.classical is not None:
        per_point += parallel_map(_classical_ledger, [(cfg, p) for p in cfg.classical_points()], jobs)
    checks = [c for group in per_point for c in group]
    counts = {s: sum(c["status"] == s for c in checks) for s in ("pass", "fail", "flag", "skip")}
    return {
        "backend": kernels.BACKEND,
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
        "n_points": len(per_point),
        "checks": checks,
        "summary": {"n_checks": len(checks), **counts},
        "ok": counts["fail"] == 0 and counts["flag"] == 0,
    }


# --- golden snapshots --------------------------------------------------------

# residuals are rounding noise and are gated by the ledger instead
_EXCLUDED = ("fd_error", "local_checks")


def _round(v: float) -> float:
    return float(f"{v:.{SIG_GOLDEN}g}") if math.isfinite(v) else v


def _scalars(report) -> dict:
    out = {}
    for f in dataclasses.fields(report):
        if f.name in _EXCLUDED or f.name.startswith("residual"):
            continue
        v = getattr(report, f.name)
        if dataclasses.is_dataclass(v):
            out.update({f"{f.name}.{k}": x for k, x in _scalars(v).items()})
        elif isinstance(v, tuple):
            out.update({f"{f.name}[{i}]": _round(float(x)) for i, x in enumerate(v)})
        elif isinstance(v, (float, int, np.floating)) and not isinstance(v, bool):
            out[f.name] = _round(float(v))
    return out


def _snapshot_point(task: tuple[RunConfig, dict]) -> dict:
    cfg, point = task
    dc = driven(cfg.spec_at(point["g_scale"], point["J"]))
    mf = dc.at_J()
    beta = point["beta"]
    return {
        "point": point,
        "gt": _scalars(gt_report(mf, beta, cfg.fd)),
        "pm": _scalars(pm_report(mf, beta, cfg.fd)),
        "jz": _scalars(jz_partial_molar(dc, beta, cfg.fd)),
    }


def _snapshot_classical(task: tuple[RunConfig, dict]) -> dict:
    cfg, point = task
    thermo = ClassicalThermo(cfg.classical)
    entry = {"point": point, "pm": _scalars(classical_pm(thermo, point["P"], point["beta"], cfg.fd))}
    if point["P"] > 0:
        entry["bare"] = _scalars(bare_report(thermo, point["P"], point["beta"], cfg.fd))
    return entry


def snapshot(cfg: RunConfig, jobs: int = 1) -> dict:
    data = {
        "format": 1,
        "backend": kernels.BACKEND,
        "quantum": parallel_map(_snapshot_point, [(cfg, p) for p in cfg.quantum_points()], jobs),
    }
    if cfg.classical is not None:
        data["classical"] = parallel_map(_snapshot_classical, [(cfg, p) for p in cfg.classical_points()], jobs)
    return data


def compare_snapshots(golden, current, rtol: float = GOLDEN_RTOL, atol: float = GOLDEN_ATOL, path: str = "") -> list[str]:
    """Mismatch descriptions; empty when ``current`` reproduces ``golden``."""
    if isinstance(golden, dict) and isinstance(current, dict):
        out = []
        for k in sorted(set(golden) | set(current)):
            if k == "backend":
                continue
            if k not in golden or k not in current:
                out.append(f"{path}/{k}: present in only one snapshot")
                continue
            out += compare_snapshots(golden[k], current[k], rtol, atol, f"{path}/{k}")
        return out
    if isinstance(golden, list) and isinstance(current, list):
        if len(golden) != len(current):
            return [f"{path}: length {len(golden)} != {len(current)}"]
        out = []
        for i, (g, c) in enumerate(zip(golden, current)):
            out += compare_snapshots(g, c, rtol, atol, f"{path}[{i}]")
        return out
    if isinstance(golden, (int, float)) and isinstance(current, (int, float)):
        g, c = float(golden), float(current)
        if math.isnan(g) and math.isnan(c):
            return []
        if not abs(g - c) <= rtol * max(abs(g), abs(c)) + atol:
            return [f"{path}: golden {g!r} current {c!r}"]
        return []
    if golden != current:
        return [f"{path}: golden {golden!r} current {current!r}"]
    return []
