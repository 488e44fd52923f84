#!/usr/bin/env python3
"""
Command-line entry point.

Usage:
    python -m app.cli run --preset smf-1d-forced
    python -m app.cli run --config my.env --set time.dt=0.005 --strict --out results/
    python -m app.cli sweep --preset hyperbolic-1d-central-a --axis M --values 32 64 128
    python -m app.cli validate --quick
    python -m app.cli resources --formulation smf --d 3 --epsilon 1e-2 --T 1
    python -m app.cli resources --preset hyperbolic-1d-spectral-b

Exit codes: 0 success, 1 failed tolerance / numerical error, 2 invalid config.
"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigError, SchroWaveError
from app.core.logging import configure_logging
from app.schemas.experiment import ExperimentConfig
from app.schemas.resource import ComplexityScenario
from app.services import export
from app.services.config_loader import config_hash, load_config
from app.services.pipeline import prepare, run_experiment
from app.services.resources import (
    CSV_COLUMNS,
    comparison_table,
    measure_system,
    predict,
)
from app.services.sweeps import sweep, write_sweep
from app.services.validation import run_validation

FORMULATIONS = ("smf", "staggered-vs", "displacement-spectral", "displacement-central")


def _overrides(pairs: Optional[Sequence[str]]) -> dict[str, str]:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    group = p.add_mutually_exclusive_group(required=required)
    group.add_argument("--config", type=Path, help="Flat key = value config file")
    group.add_argument("--preset", help="Bundled preset name")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a config key (repeatable)")


def _load(args) -> ExperimentConfig:
    return load_config(path=args.config, preset=args.preset, overrides=_overrides(args.set))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schrowave", description="Schrödingerisation emulator for elastic waves")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Run one experiment and write its artifacts")
    _add_source(p)
    p.add_argument("--strict", action="store_true", help="Fail instead of extending the p window")
    p.add_argument("--out", type=Path, default=None, help=f"Output directory (default {settings.OUTPUT_DIR})")
    p.add_argument("--threads", type=int, default=None, help="Worker threads for per-mode evolution")
    p.add_argument("--name", default=None, help="Run name (subdirectory of --out)")

    p = sub.add_parser("sweep", help="Convergence sweep over M, N or dt")
    _add_source(p)
    p.add_argument("--axis", choices=("M", "N", "dt"), required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("validate", help="Run the invariant suite")
    p.add_argument("--quick", action="store_true", help="Skip the slow end-to-end reproductions")
    p.add_argument("--only", nargs="+", default=None, help="Run only the named checks")
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("resources", help="Predicted or measured resource estimates")
    _add_source(p, required=False)
    p.add_argument("--formulation", choices=FORMULATIONS, action="append")
    p.add_argument("--d", type=int, action="append")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=1e-2)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--k", type=int, default=None, help="Smooth-warp order")
    p.add_argument("--out", type=Path, default=None)
    return parser


# ── Subcommands ───────────────────────────────────────────────────────────────

def cmd_run(args) -> int:
    cfg = _load(args)
    outcome = run_experiment(
        cfg, strict=args.strict, out_dir=args.out, threads=args.threads, name=args.name
    )
    s = outcome.summary
    print(f"{s.name}: p*={s.recovery.p_star:.6g} p1={s.recovery.p1:.6g} "
          f"{s.metric}={s.worst_error:.3e} (tol {s.tolerance:.1e}) {'PASS' if s.passed else 'FAIL'}")
    for path in s.artifacts:
        print(f"  wrote {path}")
    if not s.passed:
        print(f"error: {s.metric} {s.worst_error:.3e} exceeds tolerance {s.tolerance:.1e}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    result = sweep(cfg, args.axis, args.values, threads=args.threads)
    out = Path(args.out or cfg.output.dir or settings.OUTPUT_DIR)
    path = write_sweep(result, cfg, out / f"sweep-{args.axis}.csv")
    for point in result.points:
        print(f"  {args.axis}={point.value:<10g} h={point.h:.4e} error={point.error:.4e}")
    print(f"observed order {result.order:.3f} against {result.reference}; wrote {path}")
    return 0


def cmd_validate(args) -> int:
    report = run_validation(quick=args.quick, only=args.only)
    for check in report.checks:
        measured = "-" if check.measured is None else f"{check.measured:.6g}"
        tolerance = "-" if check.tolerance is None else f"{check.tolerance:g}"
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name:<32} {check.module:<24} measured={measured} tol={tolerance}  {check.detail}")
    out = Path(args.out or settings.OUTPUT_DIR)
    path = export.write_json(out / "validation.json", report)
    print(f"wrote {path}")
    if not report.passed:
        failed = [c.name for c in report.checks if not c.passed]
        print(f"error: {len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_resources(args) -> int:
    if args.config or args.preset:
        cfg = _load(args)
        prepared = prepare(cfg)
        estimates = [measure_system(
            prepared.schrodingerized, cfg.time.T, epsilon=args.epsilon, formulation=cfg.formulation
        )]
        metadata = {"source": "measured", "config_hash": config_hash(cfg)}
        out = Path(args.out or cfg.output.dir or settings.OUTPUT_DIR)
    else:
        formulations = args.formulation or list(FORMULATIONS)
        dims = args.d or [1, 2, 3]
        estimates = []
        for f in formulations:
            for d in dims:
                if f == "staggered-vs" and d == 1:
                    continue
                try:
                    scenario = ComplexityScenario(
                        formulation=f, d=d, r=args.r, epsilon=args.epsilon, T=args.T, k=args.k
                    )
                except ValidationError as exc:
                    raise ConfigError(
                        "invalid resource scenario",
                        [f"{e['loc'][0]}: {e['msg']}" for e in exc.errors()],
                    ) from exc
                estimates.append(predict(scenario))
        metadata = {"source": "predicted", "label": estimates[0].label if estimates else ""}
        out = Path(args.out or settings.OUTPUT_DIR)

    rows = comparison_table(estimates)
    export.write_json(out / "resources.json", [e.model_dump(mode="json") for e in estimates])
    path = export.write_csv(out / "resources.csv", CSV_COLUMNS, ([r[c] for c in CSV_COLUMNS] for r in rows), metadata)
    for row in rows:
        print("  " + "  ".join(f"{c}={export.fmt(row[c])}" for c in CSV_COLUMNS))
    print(f"wrote {path}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "resources": cmd_resources,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except SchroWaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
