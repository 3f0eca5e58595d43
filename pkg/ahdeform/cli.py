"""
Command-line interface.

    ahdeform run <config>
    ahdeform verify-lemma <config>
    ahdeform scan-horizons <metric-file>
    ahdeform static-test <metric-file> --window a,b

Every verb accepts ``--log-level`` and ``--output``. ``run`` and
``verify-lemma`` exit with 0 on a full pass, 2 on a verification failure and
1 on an execution error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import minimal_sphere_scan, static_kernel_test
from .config import RunConfig
from .errors import AHDeformError
from .pipeline import ExitCode, RunReport, run_lemma, run_pipeline, write_outputs
from .serialization import dumps, load_profile, write_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s: %(name)s: %(message)s"


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"window must be 'a,b' with two numbers, got {text!r}") from e
    return lo, hi


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging threshold (default: WARNING)",
    )
    p.add_argument(
        "--output",
        default=None,
        help="output directory (default: the configured one, or stdout for single results)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahdeform",
        description="Mass-decreasing conformal deformations of radial asymptotically hyperbolic metrics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="run the full pipeline from a configuration file")
    run.add_argument("config", help="JSON run configuration")
    _add_common_args(run)

    lemma = verbs.add_parser("verify-lemma", help="check the closed-form mass drop only")
    lemma.add_argument("config", help="JSON run configuration")
    _add_common_args(lemma)

    scan = verbs.add_parser("scan-horizons", help="locate minimal coordinate spheres of a profile")
    scan.add_argument("metric_file", help="JSON profile document")
    _add_common_args(scan)

    static = verbs.add_parser("static-test", help="radial static kernel test on a window")
    static.add_argument("metric_file", help="JSON profile document")
    static.add_argument("--window", type=_window, required=True, help="window 'a,b' in t")
    static.add_argument("--static-tol", type=float, default=1e-6)
    static.add_argument("--gap-tol", type=float, default=1e-2)
    _add_common_args(static)
    return parser


def _finish(report: RunReport, output: Optional[str]) -> int:
    try:
        paths = write_outputs(report, output)
    except OSError as e:
        print(f"ERROR: cannot write outputs: {e}", file=sys.stderr)
        return ExitCode.ERROR
    print(f"{report.status}: {paths[0]}")
    if report.error:
        print(f"ERROR in stage {report.failed_stage}: {report.error}", file=sys.stderr)
    for failure in report.failures:
        print(f"FAIL: {failure}", file=sys.stderr)
    return report.exit_code


def _emit(result: object, output: Optional[str], name: str) -> None:
    if output is None:
        sys.stdout.write(dumps(result))
    else:
        print(write_json(Path(output) / name, result))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)

    try:
        if args.verb in ("run", "verify-lemma"):
            config = RunConfig.from_file(args.config)
            report = run_pipeline(config) if args.verb == "run" else run_lemma(config)
            return _finish(report, args.output)

        metric = load_profile(args.metric_file)
        if args.verb == "scan-horizons":
            _emit(minimal_sphere_scan(metric), args.output, "horizons.json")
        else:
            verdict = static_kernel_test(
                metric, args.window, static_tol=args.static_tol, gap_tol=args.gap_tol
            )
            _emit(verdict, args.output, "static.json")
    except AHDeformError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return ExitCode.ERROR
    return ExitCode.OK


__all__ = ["build_parser", "main"]
