# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from importlib import metadata
from typing import TYPE_CHECKING

from loguru import logger

if TYPE_CHECKING:
    import argparse
    from argparse import ArgumentParser

UNKNOWN_VERSION = "Unknown"
NO_LONGHELP = "Long Help not available. Please add a docstring to {package}/__init__.py"

# numerical results depend on these, so --version reports them too
NUMERIC_PACKAGES = ("numpy", "scipy")


def package_version(package: str | None) -> str:
    """Installed metadata first, then the module's __version__, else UNKNOWN_VERSION."""
    if not package:
        return UNKNOWN_VERSION
    try:
        return metadata.version(package)
    except (ValueError, metadata.PackageNotFoundError):
        logger.debug(f"no installed metadata for {package}")
    try:
        return str(importlib.import_module(package).__version__)
    except (ImportError, AttributeError, TypeError):
        logger.debug(f"could not import {package}.__version__")
    return UNKNOWN_VERSION


@dataclass
class InfoControl:
    """--version and --longhelp; both end the run right after printing."""

    app_package: str | None = None
    numeric_packages: tuple[str, ...] = field(default=NUMERIC_PACKAGES)

    def add_arguments(self, parser: ArgumentParser) -> ArgumentParser:
        group = parser.add_argument_group(title="Informational Commands")
        group.add_argument(
            "-v",
            "--version",
            dest="version",
            action="store_true",
            help="Show the version, with the numpy and scipy versions in use.",
        )
        group.add_argument(
            "--longhelp", dest="longhelp", action="store_true", help="Show the long description of the model."
        )
        return parser

    def setup(self, settings: argparse.Namespace) -> None:
        if settings.longhelp and self.app_package:
            logger.info(self.longhelp_text())
            settings.quick_exit = True
        elif settings.version:
            logger.info(self.version_text())
            settings.quick_exit = True

    def version_text(self) -> str:
        """The version line with the numeric stack, ex: "Version 0.1.0 (numpy 2.0.1, scipy 1.14.0)"."""
        stack = ", ".join(f"{name} {package_version(name)}" for name in self.numeric_packages)
        text = f"Version {package_version(self.app_package)}"
        return f"{text} ({stack})" if stack else text

    def longhelp_text(self) -> str:
        missing = NO_LONGHELP.format(package=self.app_package)
        try:
            module = importlib.import_module(str(self.app_package))
        except (ModuleNotFoundError, TypeError):
            return missing
        return module.__doc__ or missing
