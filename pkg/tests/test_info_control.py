# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import argparse

import bathyflow
from bathyflow.cli.info_control import NO_LONGHELP, UNKNOWN_VERSION, InfoControl, package_version


def test_package_version() -> None:
    assert package_version("numpy") not in ("", UNKNOWN_VERSION)
    assert package_version(".") == UNKNOWN_VERSION
    assert package_version(None) == UNKNOWN_VERSION


def test_version_text_lists_the_numeric_stack() -> None:
    text = InfoControl(app_package="bathyflow").version_text()
    assert text.startswith("Version ")
    assert "numpy " in text
    assert "scipy " in text


def test_version_text_without_numeric_stack() -> None:
    assert InfoControl(app_package=".", numeric_packages=()).version_text() == f"Version {UNKNOWN_VERSION}"


def test_longhelp_is_the_package_docstring() -> None:
    assert InfoControl(app_package="bathyflow").longhelp_text() == bathyflow.__doc__


def test_missing_longhelp() -> None:
    assert InfoControl(app_package=".").longhelp_text() == NO_LONGHELP.format(package=".")


def test_setup_sets_quick_exit() -> None:
    control = InfoControl(app_package="bathyflow")
    parser = control.add_arguments(argparse.ArgumentParser())
    for args, quick in ((["--version"], True), (["--longhelp"], True), ([], False)):
        settings = parser.parse_args(args)
        settings.quick_exit = False
        control.setup(settings)
        assert settings.quick_exit is quick
