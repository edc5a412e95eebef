#!/usr/bin/env python3
"""
hyperl4 - exact L^4 norms of hyperbolic Schrodinger evolutions on T^3.

Main entry point for hyperl4. Parses command-line arguments, sets up logging
and dispatches to the sub-command. Exit codes: 0 success, 1 check failure,
2 usage/parse/config error, 3 budget exceeded, 130 interrupted.
"""

import logging
import sys

from hyperl4.cli import parse_args, to_run_config
from hyperl4.core import run_command
from hyperl4.errors import (
    BoundError,
    BudgetExceededError,
    ConfigError,
    ContainmentError,
    PointSetParseError,
    StabilityError,
)
from hyperl4.utils.logger import setup_logging

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_INTERRUPTED = 130

USAGE_ERRORS = (
    PointSetParseError,
    ConfigError,
    BoundError,
    ContainmentError,
    StabilityError,
)


def main(argv: list[str] | None = None) -> None:
    """Main entry point for hyperl4."""
    args = parse_args(argv)

    try:
        config = to_run_config(args)
        setup_logging(args.log_level, config.output, args.log_file)
        logging.info(f"hyperl4 starting: {args.command}")
        summary = run_command(config)
    except KeyboardInterrupt:
        logging.warning("Interrupted by user")
        sys.exit(EXIT_INTERRUPTED)
    except BudgetExceededError as e:
        logging.error(f"Budget exceeded: {e.message}")
        sys.exit(EXIT_BUDGET)
    except USAGE_ERRORS as e:
        logging.error(e.message)
        sys.exit(EXIT_USAGE)
    except Exception as e:
        logging.exception(f"Fatal error: {e}")
        sys.exit(EXIT_CHECK_FAILED)

    sys.exit(EXIT_OK if summary["ok"] else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    main()
