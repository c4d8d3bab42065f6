# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Config and report files in JSON or TOML, chosen by extension.

Parser errors, unknown extensions and non-dict payloads surface as ValueError. Saving writes a
temporary file next to the target and renames it over the target.
"""

from __future__ import annotations

import argparse
import json
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from json import JSONDecodeError
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar

import tomlkit
import tomlkit.parser

if TYPE_CHECKING:
    from collections.abc import Sequence


def _atomic_write(filepath: Path, text: str) -> None:
    filepath.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile("wt", dir=filepath.parent, delete=False, encoding="utf-8") as tf:
        tf.write(text)
        temp_name = Path(tf.name)
    temp_name.replace(filepath)


class ConfigFormat(ABC):
    extensions: ClassVar[tuple[str, ...]] = ()

    @staticmethod
    @abstractmethod
    def load(filepath: Path) -> dict[str, Any]:
        pass

    @staticmethod
    @abstractmethod
    def dumps(config_dict: dict[str, Any]) -> str:
        pass


class JsonFormat(ConfigFormat):
    extensions = (".json",)

    @staticmethod
    def load(filepath: Path) -> dict[str, Any]:
        with filepath.open(encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            errmsg = f'Data loaded from "{filepath}" is not a dictionary.'
            raise ValueError(errmsg)
        return data

    @staticmethod
    def dumps(config_dict: dict[str, Any]) -> str:
        return json.dumps(config_dict, indent=2) + "\n"


class TomlFormat(ConfigFormat):
    extensions = (".toml", ".tml")

    @staticmethod
    def load(filepath: Path) -> dict[str, Any]:
        with filepath.open(encoding="utf-8") as f:
            data: dict[str, Any] = tomlkit.load(f).unwrap()
        return data

    @staticmethod
    def dumps(config_dict: dict[str, Any]) -> str:
        return tomlkit.dumps(config_dict)


SUPPORTED_FORMATS: list[type[ConfigFormat]] = [TomlFormat, JsonFormat]


@dataclass
class ConfigFile:
    """
    Usage:

        config_file = ConfigFile()
        data = config_file.load(Path("demo.json"))
        config_file.save(Path("report.json"), {"passed": True})
    """

    persist_keys: set[str] = field(default_factory=set)
    section_name: str | None = None
    default_config_file: Path | None = None
    config_filepath: Path | None = None
    data: dict[str, Any] = field(default_factory=dict)
    formats: dict[str, type[ConfigFormat]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for supported_format in SUPPORTED_FORMATS:
            for extension in supported_format.extensions:
                self.formats[extension] = supported_format

    @property
    def supported_extensions(self) -> list[str]:
        """Extensions include the leading dot (ex: ".toml")."""
        return list(self.formats)

    def _format(self, filepath: Path, action: str) -> type[ConfigFormat]:
        try:
            return self.formats[filepath.suffix]
        except KeyError as ex:
            errmsg = f"No config file {action} found for {filepath}"
            raise ValueError(errmsg) from ex

    def load(self, filepath: Path | None) -> dict[str, Any]:
        """raises: ValueError, FileNotFoundError"""
        if filepath is None:
            return {}
        loader = self._format(filepath, "loader")
        try:
            return loader.load(filepath)
        except (JSONDecodeError, tomlkit.parser.ParseError, TypeError, UnicodeDecodeError) as ex:
            errmsg = f"The config file ({filepath}) could not be loaded: {ex}"
            raise ValueError(errmsg) from ex

    def save(self, filepath: Path, config_dict: dict[str, Any]) -> None:
        """raises: ValueError"""
        if not isinstance(config_dict, dict):
            errmsg = f"The config file ({filepath}) must be a dictionary"  # type: ignore[unreachable]
            raise ValueError(errmsg)
        saver = self._format(filepath, "saver")
        try:
            text = saver.dumps(config_dict)
        except (TypeError, ValueError) as ex:
            errmsg = f"Cannot convert the data to the format of the config file {filepath}: {ex}"
            raise ValueError(errmsg) from ex
        _atomic_write(filepath, text)

    def parser(self, args: Sequence[str]) -> tuple[argparse.ArgumentParser, Sequence[str], dict[str, Any]]:
        """Pre-parse --config; returns the parser, the other arguments and the persisted defaults."""
        dash_config_parser = argparse.ArgumentParser(add_help=False)
        dash_config_parser.add_argument(
            "--config", metavar="FILE", help=f"Run configuration file (default: {self.default_config_file})"
        )
        parse_args, remaining_args = dash_config_parser.parse_known_args(args=args)

        self.config_filepath = Path(parse_args.config) if parse_args.config else self.default_config_file
        defaults: dict[str, Any] = {}
        if self.config_filepath is not None:
            try:
                self.data = self.load(self.config_filepath)
            except FileNotFoundError:
                if parse_args.config:
                    dash_config_parser.error(f"config file {self.config_filepath} not found")
                # a missing default config file means no defaults
                self.data = {}
            section = self.data.get(self.section_name or "", {})
            if isinstance(section, dict):
                defaults = {key: value for key, value in section.items() if key in self.persist_keys}
        return dash_config_parser, remaining_args, defaults
