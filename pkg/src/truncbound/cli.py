"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 configuration/input error,
3 numerical error, 4 verification failure, 5 adaptive budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import _backend
from .errors import ConfigError, PropertyFailure, TruncboundError
from .io import write_json, write_matrix_market, write_nu_csv
from .kernel import SparseKernel
from .pipeline import RunConfig, compute_nu, run_adapt, run_bounds, run_verify

log = logging.getLogger("truncbound")


def _load_config(path) -> RunConfig:
    if path is None:
        raise ConfigError("--config is required")
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return RunConfig.from_dict(obj, Path(path).parent)


def _emit(report, cfg, name, normalize):
    if normalize:
        report.pop("timings", None)
    if cfg.output_dir is None:
        sys.stdout.write(write_json(None, report))
        return
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_json(cfg.output_dir / name, report)


def cmd_bounds(args, cfg):
    report, nt = run_bounds(cfg)
    if cfg.output_dir is not None and cfg.write_nu_csv:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        write_nu_csv(cfg.output_dir / "nu_table.csv", nt)
    _emit(report, cfg, "bounds_report.json", args.normalize_report)
    return 0


def cmd_nu(args, cfg):
    _, _, nt, _ = compute_nu(cfg)
    if cfg.output_dir is None:
        out = Path("nu_table.csv")
    else:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        out = cfg.output_dir / "nu_table.csv"
        write_matrix_market(cfg.output_dir / "nu_table.mtx", SparseKernel.from_dense(nt.nu), nt.space,
                            cfg.output_dir / "nu_table.labels.json")
    write_nu_csv(out, nt)
    return 0


def cmd_verify(args, cfg):
    trials = cfg.trials if args.trials is None else args.trials
    if trials < 0:
        raise ConfigError("--trials must be nonnegative")
    report = run_verify(cfg, trials, args.seed, corrupt=args.inject_corrupt_nu)
    _emit(report, cfg, "verify_report.json", args.normalize_report)
    if not report["passed"]:
        first = report["failures"][0]
        raise PropertyFailure(
            f"{len(report['failures'])} of {trials} trials failed",
            seed=args.seed, trial=first["trial"], trial_seed=first["trial_seed"])
    return 0


def cmd_adapt(args, cfg):
    report, exc = run_adapt(cfg)
    _emit(report, cfg, "adapt_report.json", args.normalize_report)
    if exc is not None:
        raise exc
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--normalize-report", action="store_true", help="omit wall-clock timings")
    common.add_argument("--output-dir", default=None, help="override the config's output_dir")

    parser = argparse.ArgumentParser(prog="truncbound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bounds", parents=[common], help="reward bounds and TV diameter for a window")
    sub.add_parser("nu", parents=[common], help="dump the nu table only")
    p = sub.add_parser("verify", parents=[common], help="randomized round-trip checks of the mixture representation")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--inject-corrupt-nu", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("adapt", parents=[common], help="grow the boundary layer until the diameter meets eps")
    return parser


COMMANDS = {"bounds": cmd_bounds, "nu": cmd_nu, "verify": cmd_verify, "adapt": cmd_adapt}


def main(argv=None) -> int:
    level = os.environ.get("TRUNCBOUND_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            _backend.set_threads(args.threads)
        cfg = _load_config(args.config)
        if args.output_dir is not None:
            cfg.output_dir = Path(args.output_dir)
        return COMMANDS[args.command](args, cfg)
    except TruncboundError as exc:
        sys.stderr.write(json.dumps(exc.to_dict() | {"exit_code": exc.exit_code}) + "\n")
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001 - every path must end in a documented exit code
        log.debug("internal error", exc_info=True)
        sys.stderr.write(json.dumps({"error": "INTERNAL", "message": repr(exc), "exit_code": 1}) + "\n")
        return 1
    finally:
        _backend.set_threads(None)


if __name__ == "__main__":
    sys.exit(main())
