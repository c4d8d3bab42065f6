# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
The version lives in project.version and tool.poetry.version of pyproject.toml; the package reads it back
from the installed metadata, or from pyproject.toml with a "dev" suffix when it is not installed.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

import tomlkit

import bathyflow
from bathyflow.__main__ import main

if TYPE_CHECKING:
    from _pytest.capture import CaptureFixture

PYPROJECT = Path(__file__).parent.parent / "pyproject.toml"


def project_version() -> str:
    data = tomlkit.loads(PYPROJECT.read_text(encoding="utf-8")).unwrap()
    assert data["project"]["version"] == data["tool"]["poetry"]["version"]
    return str(data["project"]["version"])


def test_package_version_follows_pyproject() -> None:
    assert bathyflow.__version__ in (project_version(), project_version() + "dev")


def test_cli_version(capsys: CaptureFixture[Any]) -> None:
    assert main(["--version"]) == 0
    out = capsys.readouterr().out
    assert project_version() in out
    assert "numpy" in out


def test_cli_longhelp(capsys: CaptureFixture[Any]) -> None:
    assert main(["--longhelp"]) == 0
    assert "--mu-sweep" in capsys.readouterr().out
