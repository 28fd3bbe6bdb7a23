"""
Command line entry point.

    contact-duality run <config.toml|manifest.json> [--set section.key=value ...]
                        [--log-level LEVEL]

Exit codes: 0 pass, 1 runtime failure, 2 config error, 3 flagged violation.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .core.config import get_config
from .core.run_config import RunConfigError, load_run_config
from .runner import EXIT_CONFIG, EXIT_FAILURE, ExperimentRunner

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contact-duality",
        description="Two-type contact process experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run the experiment described by a config file")
    run.add_argument("config", help="TOML run config, or a manifest.json to re-run")
    run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value (repeatable; values are TOML literals)",
    )
    run.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        type=str.upper,
        default=None,
        help="Log level (default: LOG_LEVEL setting)",
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    try:
        settings = get_config()
    except ValidationError as e:
        print(f"Invalid environment settings:\n{e}", file=sys.stderr)
        return EXIT_CONFIG

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, args.log_level or settings.LOG_LEVEL),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    try:
        config = load_run_config(args.config, args.overrides)
    except RunConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG

    try:
        manifest = ExperimentRunner(config).run()
    except Exception as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        return EXIT_FAILURE
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
