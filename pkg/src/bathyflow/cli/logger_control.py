# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import os
import sys
from typing import TYPE_CHECKING, Any

from loguru import logger
from pathvalidate.argparse import validate_filepath_arg

if TYPE_CHECKING:
    import argparse
    from argparse import ArgumentParser
    from collections.abc import Sequence

LOG_ENVIRONMENT_VARIABLE = "BATHYFLOW_LOG"

# just the colorized message on the console
LOGURU_SHORT_FORMAT = "<level>{message}</level>"

VALID_LOG_LEVELS: Sequence[str] = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def default_log_level() -> str:
    """BATHYFLOW_LOG when it names a valid level, else INFO."""
    level = os.environ.get(LOG_ENVIRONMENT_VARIABLE, "").strip().upper()
    return level if level in VALID_LOG_LEVELS else "INFO"


class LoggerControl:
    """--loglevel, --debug, --quiet and --logfile; precedence quiet > debug > loglevel."""

    def add_arguments(self, parser: ArgumentParser) -> None:
        output_group = parser.add_argument_group(title="Logging Options")
        output_group.add_argument(
            "--loglevel",
            dest="loglevel",
            default=default_log_level(),
            choices=VALID_LOG_LEVELS,
            help=f"Verbosity, one of {list(VALID_LOG_LEVELS)} (default: ${LOG_ENVIRONMENT_VARIABLE} or INFO).",
        )
        output_group.add_argument(
            "--debug", dest="debug", action="store_true", help='Output all messages. Overrides "--loglevel".'
        )
        output_group.add_argument(
            "--quiet",
            dest="quiet",
            action="store_true",
            help='Only output error and critical messages. Overrides "--loglevel" and "--debug".',
        )
        output_group.add_argument(
            "--logfile",
            dest="logfile",
            action="store",
            type=validate_filepath_arg,
            help="Also write the log to this file.",
        )

    @staticmethod
    def setup(settings: argparse.Namespace) -> None:
        settings_dict: dict[str, Any] = vars(settings)
        error_messages = []

        level = settings_dict.get("loglevel") or default_log_level()
        if level not in VALID_LOG_LEVELS:
            error_messages.append(f"Invalid log level {level}, should be one of {list(VALID_LOG_LEVELS)}")
            level = "INFO"
        if settings_dict.get("debug"):
            level = "DEBUG"
        if settings_dict.get("quiet"):
            level = "ERROR"

        settings.loglevel = level
        logger.remove(None)
        logger.add(sys.stdout, level=level, format=LOGURU_SHORT_FORMAT)

        filename = settings_dict.get("logfile")
        if filename:
            try:
                logger.add(filename, level=level)
            except OSError as ex:
                error_messages.append(f"Could not open logfile ({filename}): {ex}")

        for msg in error_messages:
            logger.error(msg)
