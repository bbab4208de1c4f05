"""Command line: ``strongtherm {validate,sweep,classical,snapshot,compare}``.

Exit status is 0 when every gate passes, 1 when a gate fails and 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import kernels, runner
from .config import SWEEP_KINDS, RunConfig, load_config, parse_tolerance_flag
from .errors import ConfigError, StrongThermError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("strongtherm")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration (dotted keys)")
    common.add_argument("--out", type=Path, help="output file; defaults to the config's outputs.* entry")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance; NAME may be a glob")
    common.add_argument("--seed", type=int, help="seed for randomized checks")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (ordered results)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="strongtherm", description="Strong-coupling thermodynamics of exactly diagonalizable system + bath models.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="evaluate the identity ledger over the grid")
    sw = sub.add_parser("sweep", parents=[common], help="tabulate one report kind over the grid as CSV")
    sw.add_argument("--kind", choices=SWEEP_KINDS, help="report kind (default: config sweep.kind or pm)")
    sub.add_parser("classical", parents=[common], help="bare and partial-molar classical quantities as CSV")
    sub.add_parser("snapshot", parents=[common], help="write a golden JSON snapshot of all report scalars")
    cmp_ = sub.add_parser("compare", parents=[common], help="recompute and compare against a golden snapshot")
    cmp_.add_argument("--golden", type=Path, help="golden snapshot (default: config outputs.golden)")
    return p


def _resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = dict(parse_tolerance_flag(t) for t in args.tol)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1", key="--jobs")
    return cfg.with_overrides(overrides, args.seed)


def _output(args, cfg: RunConfig, key: str) -> Path | None:
    if args.out is not None:
        return args.out
    if key in cfg.outputs:
        return Path(cfg.outputs[key])
    return None


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path}")


def _json(data) -> str:
    return json.dumps(data, indent=1, sort_keys=True, allow_nan=True) + "\n"


def cmd_validate(args, cfg: RunConfig) -> int:
    ledger = runner.run_validation(cfg, args.jobs)
    path = _output(args, cfg, "ledger")
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(_json(ledger))
    for c in ledger["checks"]:
        if c["status"] in ("fail", "flag"):
            where = " ".join(f"{k}={v:.6g}" for k, v in c["point"].items())
            print(
                f"{c['status'].upper():4} {c['name']:40} residual={c['residual']:.3e} "
                f"tol={c['tolerance']:.1e} fd_error={c['fd_error']:.1e} at {where}"
            )
    s = ledger["summary"]
    print(
        f"{s['n_checks']} checks over {ledger['n_points']} points: "
        f"{s['pass']} pass, {s['fail']} fail, {s['flag']} flagged, {s['skip']} skipped (backend {kernels.BACKEND})"
    )
    if path is not None:
        print(f"wrote {path}")
    return EXIT_OK if ledger["ok"] else EXIT_FAIL


def cmd_sweep(args, cfg: RunConfig) -> int:
    kind = args.kind or cfg.sweep_kind
    rows = runner.run_sweep(cfg, kind, args.jobs)
    _emit(runner.sweep_csv(rows, kind), _output(args, cfg, "csv"))
    if kind == "pm":
        negative = runner.negative_capacity_summary(rows)
        print(f"C_s_pm < 0 at {len(negative)} point(s)")
        for line in negative:
            print(f"  {line}")
    bad = [r for r in rows if any(not math.isfinite(v) for k, v in r.items() if k.startswith("residual"))]
    return EXIT_FAIL if bad else EXIT_OK


def cmd_classical(args, cfg: RunConfig) -> int:
    if cfg.classical is None:
        raise ConfigError("the classical subcommand needs classical.* keys in the config", key="classical")
    rows = runner.run_classical(cfg, args.jobs)
    _emit(runner.classical_csv(rows), _output(args, cfg, "classical_csv"))
    return EXIT_OK


def cmd_snapshot(args, cfg: RunConfig) -> int:
    path = _output(args, cfg, "golden")
    _emit(_json(runner.snapshot(cfg, args.jobs)), path)
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    path = args.golden or (Path(cfg.outputs["golden"]) if "golden" in cfg.outputs else None)
    if path is None:
        raise ConfigError("compare needs --golden or outputs.golden", key="outputs.golden")
    try:
        golden = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read golden snapshot {path}: {exc.strerror}", key="outputs.golden") from exc
    if golden.get("backend") != kernels.BACKEND:
        log.warning("golden snapshot was written with the %s backend, running %s", golden.get("backend"), kernels.BACKEND)
    current = json.loads(_json(runner.snapshot(cfg, args.jobs)))
    mismatches = runner.compare_snapshots(golden, current)
    for m in mismatches:
        print(f"MISMATCH {m}")
    print(
        f"{len(mismatches)} mismatch(es) against {path} "
        f"(rtol {runner.GOLDEN_RTOL:g}, atol {runner.GOLDEN_ATOL:g})"
    )
    return EXIT_FAIL if mismatches else EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "sweep": cmd_sweep,
    "classical": cmd_classical,
    "snapshot": cmd_snapshot,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StrongThermError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
