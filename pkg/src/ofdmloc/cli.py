"""Command-line front end: sweeps, ambiguity cuts, oracle checks, complexity.

Configs are JSON (snake_case keys matching SystemConfig); results are CSV
with fixed schemas and full-precision round-trip floats. Every result file
is emitted alongside a JSON manifest from which the run can be reproduced
byte-for-byte. Exit codes: 0 success, 1 validation/suite failure, 2
usage/config error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import (ESTIMATOR_NAMES, account_complexity, ambiguity_function,
                         default_thread_count, run_sweep)
from .model import ConfigError, SystemConfig, build_scene, config_from_dict, config_to_dict
from .oracles import run_identity_suite, run_quadrature_suite

_DEFAULT_ESTIMATORS = "P,PD,HDD-centr,HDD-distr,SDD-centr,SDD-distr,MML-fast"
_COMPLEXITY_ESTIMATORS = "P,PD,HDD-centr,HDD-distr,SDD-centr,SDD-distr,MML-fast,MML-approx"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)  # shortest round-trip representation
    return str(value)


def _load_config_and_manifest(path: str):
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
    if isinstance(data.get("config"), dict):
        return config_from_dict(data["config"]), data
    return config_from_dict(data), None


def _write_manifest(out_path: Path, command: str, cfg: SystemConfig, extra: dict):
    manifest = {
        "tool": "ofdmloc",
        "version": __version__,
        "command": command,
        "config": config_to_dict(cfg),
        "base_seed": cfg.base_seed,
        "outputs": [str(out_path)],
        **extra,
    }
    mpath = out_path.with_name(out_path.stem + ".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2) + "\n")
    return mpath


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_sweep(args) -> int:
    cfg, manifest = _load_config_and_manifest(args.config)
    if args.estimators is not None:
        names = args.estimators.split(",")
    elif manifest is not None and "estimators" in manifest:
        names = list(manifest["estimators"])
    else:
        names = _DEFAULT_ESTIMATORS.split(",")
    unknown = [n for n in names if n not in ESTIMATOR_NAMES]
    if unknown:
        raise ConfigError(f"unknown estimator(s) {unknown}; valid: {list(ESTIMATOR_NAMES)}")
    threads = args.threads if args.threads else default_thread_count()

    started = _utcnow()
    result = run_sweep(cfg, names, threads=threads)
    out = Path(args.out)
    lines = ["estimator,snr_db,rmse_m,rmse_lambda,ser,mae,n_trials,tx_scalars_per_node"]
    for row in result.iter_rows():
        lines.append(",".join(_fmt(v) for v in (
            row.estimator, row.snr_db, row.rmse_m, row.rmse_lambda,
            row.ser, row.mae, row.n_trials, row.tx_scalars_per_node)))
    _write_text(out, "\n".join(lines) + "\n")
    mpath = _write_manifest(out, "sweep", cfg, {
        "estimators": [n for n in ESTIMATOR_NAMES if n in names],
        "threads": threads, "started_utc": started, "finished_utc": _utcnow()})
    print(f"wrote {out} and {mpath}")
    return 0


def cmd_af(args) -> int:
    cfg, _ = _load_config_and_manifest(args.config)
    if args.samples < 2:
        raise ConfigError("--samples must be >= 2")
    scene = build_scene(cfg, np.random.default_rng(cfg.base_seed))
    cut = ambiguity_function(scene, cfg, p_true=(0.0, 0.0), axis=args.cut_axis,
                             n_samples=args.samples, normalize=True)
    out = Path(args.out)
    lines = ["x_m,af_coh_norm,af_noncoh_norm"]
    for x, c, nc in zip(cut.coords, cut.af_coh, cut.af_noncoh):
        lines.append(f"{_fmt(float(x))},{_fmt(float(c))},{_fmt(float(nc))}")
    _write_text(out, "\n".join(lines) + "\n")
    mpath = _write_manifest(out, "af", cfg, {"cut_axis": args.cut_axis,
                                             "samples": args.samples})
    print(f"wrote {out} and {mpath}")
    return 0


def cmd_oracle_check(args) -> int:
    reports = [
        run_quadrature_suite(n_instances=args.instances, seed=args.seed),
        run_identity_suite(n_instances=args.instances, seed=args.seed),
    ]
    for rep in reports:
        print(rep.line())
    return 0 if all(r.passed for r in reports) else 1


def cmd_complexity(args) -> int:
    cfg, _ = _load_config_and_manifest(args.config)
    names = (args.estimators or _COMPLEXITY_ESTIMATORS).split(",")
    out = Path(args.out)
    lines = ["estimator,step,measured_ops,asymptotic_formula,instantiated_value"]
    for name in names:
        for row in account_complexity(cfg, name):
            lines.append(",".join(_fmt(v) for v in (
                row.estimator, row.step, row.measured_ops, row.formula, row.instantiated)))
    _write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    return 0


def _write_text(path: Path, text: str):
    try:
        path.write_text(text, newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofdmloc",
        description="Localization from OFDM pilot+data frames on a distributed array")
    parser.add_argument("--version", action="version", version=f"ofdmloc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo RMSE/SER/MAE sweep over SNR")
    p.add_argument("config", help="JSON config file (or a sweep manifest)")
    p.add_argument("--estimators", default=None,
                   help=f"comma-separated estimator names (default {_DEFAULT_ESTIMATORS})")
    p.add_argument("--out", default="sweep.csv", help="output CSV path")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: OFDMLOC_THREADS or all cores)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("af", help="ambiguity-function cut (noise-free, peak-normalized)")
    p.add_argument("config", help="JSON config file")
    p.add_argument("--cut-axis", choices=("x", "y"), default="x")
    p.add_argument("--samples", type=int, default=801)
    p.add_argument("--out", default="af.csv", help="output CSV path")
    p.set_defaults(func=cmd_af)

    p = sub.add_parser("oracle-check",
                       help="validate the marginal-likelihood implementations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=100)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("complexity", help="measured vs asymptotic operation counts")
    p.add_argument("config", help="JSON config file")
    p.add_argument("--estimators", default=None)
    p.add_argument("--out", default="complexity.csv", help="output CSV path")
    p.set_defaults(func=cmd_complexity)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
