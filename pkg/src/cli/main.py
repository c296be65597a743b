# src/cli/main.py
"""
Command-line entry point.

    spatialecon weights  --edges edges.csv --normalize row --out W.csv
    spatialecon fit      --data d.csv --outcome y --covariates x1,x2 --weights W.csv --model all
    spatialecon diagnose --data d.csv --weights W.csv --variable y
    spatialecon impacts  --fit fits.json --weights W.csv --draws 1000
    spatialecon simulate --model sar --rho 0.5 --beta 1,-1 --lattice 20x20 --out sim/

Payloads go to stdout (or --out), logs to stderr. Failures print a JSON
error object on stderr and exit with the code of the error class.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import structlog
from pydantic import ValidationError

from src.cli.commands import diagnose, fit, impacts, simulate, weights
from src.cli.services import DataManager
from src.core import (
    EXIT_UNEXPECTED,
    ConfigError,
    OperationMetrics,
    SpatialEconException,
    Timer,
    config,
    configure_logging,
    metrics,
    resolve_threads,
)

logger = structlog.get_logger(__name__)

COMMANDS = (weights, fit, diagnose, impacts, simulate)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--normalize", choices=["raw", "row", "eigen"], help="Weights normalization")
    shared.add_argument("--seed", type=int, help="Master seed for every random draw")
    shared.add_argument("--out", type=Path, help="Output path (stdout when omitted)")
    shared.add_argument("--format", choices=["json", "text"], default="json", help="Output format")
    shared.add_argument("--threads", type=int, help="Worker threads (results do not depend on it)")
    shared.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    shared.add_argument("--log-format", choices=["console", "json"], default=None, help="Log renderer")
    shared.add_argument("--metrics-file", type=Path, help="Write Prometheus metrics here on exit")

    parser = argparse.ArgumentParser(
        prog="spatialecon",
        description="Spatial weights, diagnostics, spatial regression, impacts and simulation"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.add_parser(subparsers, [shared])
    return parser


def _error_payload(exc: SpatialEconException) -> str:
    return json.dumps(exc.to_dict(), default=str) + "\n"


def _fail(exc: SpatialEconException) -> int:
    """Handle library errors"""
    logger.error("command_failed", error_code=exc.error_code, message=exc.message)
    sys.stderr.write(_error_payload(exc))
    return exc.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_format)
    thread_cap = config.threads
    if args.threads is not None:
        config.threads = resolve_threads(args.threads)

    manager = DataManager()
    timer = Timer().start()
    try:
        with OperationMetrics(f"cli_{args.command}"):
            result = args.handler(args, manager)
            manager.emit(result.payload, result.out, args.format, result.text)
        logger.info("command_completed", command=args.command, elapsed_ms=timer.stop().elapsed_ms())
        return 0
    except SpatialEconException as exc:
        return _fail(exc)
    except ValidationError as exc:
        return _fail(ConfigError("invalid options", {"errors": str(exc)}))
    except Exception as exc:
        logger.error("unexpected_error", error=str(exc), exc_info=True)
        sys.stderr.write(json.dumps({
            "error": True,
            "error_code": "UNEXPECTED_ERROR",
            "message": "An unexpected error occurred",
            "details": {"type": type(exc).__name__} if config.debug else {},
        }) + "\n")
        return EXIT_UNEXPECTED
    finally:
        config.threads = thread_cap
        if args.metrics_file is not None:
            metrics.write(str(args.metrics_file))


if __name__ == "__main__":
    sys.exit(main())
