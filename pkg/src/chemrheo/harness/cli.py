"""Command line: ``run``, ``study``, ``suite`` and ``dump-defaults``.

Exit status: 0 every enabled check passed, 1 a check failed, 2 usage or
configuration error, 3 numerical failure.  Failures print one
``error kind=... message=...`` line on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ChemRheoError, ConfigError
from .config import Config, StudyKind, dump, parse_config
from .presets import PRESETS
from .studies import EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, run_study

log = logging.getLogger("chemrheo")


def build_parser():
    ap = argparse.ArgumentParser(prog="chemrheo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", help="override run.out")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="single run of a configuration")
    p.add_argument("config")
    p = sub.add_parser("study", parents=[common], help="run the study named in run.study")
    p.add_argument("config")
    p = sub.add_parser("suite", parents=[common], help="constitutive and norm property suite")
    p.add_argument("--preset", default="synovial", choices=PRESETS)
    p = sub.add_parser("dump-defaults", help="print the canonical default configuration")
    p.add_argument("--preset", default="taylor_green", choices=PRESETS)
    return ap


def _fail(kind, exc, status):
    msg = str(exc).replace("\n", " ")
    print(f"error kind={kind} message={msg}", file=sys.stderr)
    return status


def _apply_overrides(cfg: Config, args) -> Config:
    changes = {}
    if args.seed is not None:
        changes["run__seed"] = args.seed
    if args.out is not None:
        changes["run__out"] = args.out
    return cfg.with_values(**changes) if changes else cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else 0
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "dump-defaults":
        sys.stdout.write(dump(Config.defaults(args.preset)))
        return 0
    try:
        if args.command == "suite":
            cfg = _apply_overrides(Config.defaults(args.preset), args)
            study = StudyKind.PROPERTY_SUITE
        else:
            cfg = _apply_overrides(parse_config(args.config), args)
            study = StudyKind.SINGLE_RUN if args.command == "run" else cfg.study
    except ConfigError as exc:
        return _fail(type(exc).__name__, exc, EXIT_CONFIG)
    try:
        status, summary = run_study(cfg, study)
    except (ChemRheoError, FloatingPointError, ValueError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_NUMERIC)
    if not args.quiet:
        sys.stdout.write(summary.text())
    if status == EXIT_CHECK:
        failed = ",".join(c.name for c in summary.checks if not c.passed)
        print(f"error kind=CheckFailure message=failed checks: {failed}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
