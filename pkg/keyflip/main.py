"""
Command-line entry point.
"""

import sys
import time
from collections.abc import Sequence

import structlog

from keyflip.cli import build_parser
from keyflip.core.config import settings
from keyflip.core.exceptions import EXIT_USAGE, handle_cli_exception
from keyflip.core.logging import configure_logging

logger = structlog.get_logger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    configure_logging(level=args.log_level, log_format=args.log_format)
    structlog.contextvars.clear_contextvars()
    structlog.contextvars.bind_contextvars(command=args.command)
    logger.debug(
        "command_started",
        app_name=settings.APP_NAME,
        version=settings.APP_VERSION,
        environment=settings.ENVIRONMENT,
    )

    start_time = time.perf_counter()
    try:
        exit_code = args.func(args)
    except Exception as exc:
        exit_code = handle_cli_exception(exc)

    logger.info(
        "command_completed",
        exit_code=exit_code,
        duration_ms=round((time.perf_counter() - start_time) * 1000, 2),
    )
    return exit_code


def run() -> None:
    """Console-script wrapper."""
    sys.exit(main())
