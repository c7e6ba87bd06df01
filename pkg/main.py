#!/usr/bin/env python3
"""
defderivative - Main Entry Point
"""

import logging
import sys

import click

from config import Config
from Plugins import COMMANDS

logger = logging.getLogger(__name__)


def setup_logging(level: str = Config.LOG_LEVEL):
    """Configure logging; stdout is reserved for command output"""
    handlers = [logging.StreamHandler(sys.stderr)]
    if Config.LOG_FILE:
        handlers.append(logging.FileHandler(Config.LOG_FILE))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )


@click.group()
@click.option(
    "--log-level",
    default=Config.LOG_LEVEL,
    show_default=True,
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False),
)
def cli(log_level):
    """Symbolic derivatives with numerically checked obligations"""
    setup_logging(log_level)
    logger.debug("Logging configured at %s", log_level)


for command in COMMANDS:
    cli.add_command(command)


if __name__ == "__main__":
    cli()
