"""Command-line entry point."""

import argparse
import logging
import sys
from collections.abc import Sequence

from app.cli import commands
from app.config import get_settings


def _log_level(argv: Sequence[str] | None, default: str) -> str:
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("--log-level", dest="log_level", default=default)
    known, _ = peek.parse_known_args(argv)
    return known.log_level.upper()


def main(argv: Sequence[str] | None = None) -> int:
    """Configure logging on stderr and run one command."""
    settings = get_settings()
    logging.basicConfig(
        level=_log_level(argv, settings.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    logger = logging.getLogger(__name__)
    logger.debug(f"Starting {settings.app_name} v{settings.app_version}")
    return commands.run(argv, settings)


if __name__ == "__main__":
    sys.exit(main())
