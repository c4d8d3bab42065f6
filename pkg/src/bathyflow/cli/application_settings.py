# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
A context manager base class that reads an optional config file, uses its persisted section as argument
defaults, parses the command line and sets up logging.

Derived classes add their arguments in `add_arguments` and their checks in `validate_arguments`.
The loaded config file is kept on the namespace as `config_data` so commands can read further blocks.
"""

from __future__ import annotations

import argparse
import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Any

from bathyflow.cli.config_file import ConfigFile
from bathyflow.cli.info_control import InfoControl
from bathyflow.cli.logger_control import LoggerControl

if TYPE_CHECKING:
    from collections.abc import Sequence


class ApplicationSettings(ABC):
    """
    Usage::

        with MySettings(args) as settings:
            if settings.quick_exit:
                return 0
            run(settings)
    """

    def __init__(
        self,
        app_name: str,
        app_package: str,
        app_description: str,
        config_section: str,
        default_config_file: Path | None = None,
        args: Sequence[str] | None = None,
    ) -> None:
        self.__app_name = app_name
        self.__app_package = app_package
        self.__app_description = app_description
        self.__config_section = config_section
        self.__default_config_file = default_config_file or Path.home() / ".config" / f"{app_package}.toml"
        self.__args: Sequence[str] = sys.argv[1:] if args is None else args

        self._parser: argparse.ArgumentParser | None = None
        self._settings: argparse.Namespace | None = None
        self._remaining_argv: list[str] = []
        self._persist_keys: set[str] = set()
        self.logger_control = LoggerControl()
        self.info_control = InfoControl(app_package=app_package)

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser, defaults: dict[str, Any]) -> None:  # pragma: no cover
        """Add the application's arguments; `defaults` come from the config file section."""

    @abstractmethod
    def validate_arguments(
        self, settings: argparse.Namespace, remaining_argv: list[str]
    ) -> list[str]:  # pragma: no cover
        """Return error messages, empty when the parsed settings are usable."""
        return []

    def add_persist_keys(self, keys: set[str]) -> None:
        self._persist_keys |= keys

    def parse(self, args: Sequence[str]) -> tuple[argparse.ArgumentParser, argparse.Namespace, list[str]]:
        config_file = ConfigFile(
            persist_keys=self._persist_keys,
            section_name=self.__config_section,
            default_config_file=self.__default_config_file,
        )
        dash_config_parser, remaining_args, defaults = config_file.parser(args=args)

        parser = argparse.ArgumentParser(
            self.__app_name, parents=[dash_config_parser], description=self.__app_description
        )
        self.info_control.add_arguments(parser=parser)
        self.logger_control.add_arguments(parser=parser)
        self.add_arguments(parser=parser, defaults=defaults)
        if defaults:
            parser.set_defaults(**defaults)

        settings, leftover_args = parser.parse_known_args(args=remaining_args)
        settings.quick_exit = False
        settings.config_file = config_file.config_filepath
        settings.config_data = config_file.data
        return parser, settings, leftover_args

    def __enter__(self) -> argparse.Namespace:
        self._parser, self._settings, self._remaining_argv = self.parse(args=self.__args)

        self.logger_control.setup(self._settings)
        self.info_control.setup(self._settings)

        if not self._settings.quick_exit:
            for error_msg in self.validate_arguments(self._settings, self._remaining_argv):
                self._parser.error(error_msg)
            self._settings.parser = self._parser
        return self._settings

    def __exit__(self, *exc: Any) -> None:  # NOQA: B027
        pass
