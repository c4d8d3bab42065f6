# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from bathyflow.bathymetry import BathymetrySource, build_bathymetry, read_table
from bathyflow.errors import ParameterError
from bathyflow.sampled import make_grid

GRID = make_grid(1.0, 512)


def write_table(path: Path, rows: list[tuple[float, float, float, float]]) -> Path:
    lines = ["l,x,re,im", *(",".join(f"{value:.17g}" for value in row) for row in rows)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def exponential_rows(index: int = 1, real: float = 0.0) -> list[tuple[float, float, float, float]]:
    return [(index, x, real, -0.5 * math.exp(-x)) for x in np.linspace(0.0, 20.0, 401)]


def test_builtin_coefficients() -> None:
    spec = build_bathymetry(BathymetrySource(amplitude=1.0, modes=(1, 3)), GRID, 1.0)
    assert spec.kind == "builtin"
    assert sorted(spec.coefficients) == [-3, -1, 1, 3]
    assert spec.support_radius == 3
    g1 = spec.coefficients[1]
    assert np.allclose(g1.values, -0.5j * np.exp(-GRID), rtol=0, atol=1e-15)
    assert np.allclose(g1.require_derivative(), 0.5j * np.exp(-GRID), rtol=0, atol=1e-15)
    assert spec.symmetry_error() == 0.0


def test_builtin_reconstructs_sine_profile() -> None:
    spec = build_bathymetry(BathymetrySource(amplitude=0.7, modes=(2,)), GRID, 1.0)
    x, y = 1.3, 0.4
    total = sum(coefficient(x)[()] * np.exp(1j * index * y) for index, coefficient in spec.coefficients.items())
    assert abs(total - 0.7 * math.exp(-x) * math.sin(2 * y)) < 1e-8


@pytest.mark.parametrize(
    "source",
    [
        BathymetrySource(kind="flat"),
        BathymetrySource(amplitude=0.0),
        BathymetrySource(modes=()),
    ],
)
def test_flat(source: BathymetrySource) -> None:
    spec = build_bathymetry(source, GRID, 1.0)
    assert spec.kind == "flat"
    assert spec.is_flat
    assert spec.support_radius == 0
    assert spec.weighted_norm(0.5, 1.0) == 0.0


@pytest.mark.parametrize(
    ("source", "nu"),
    [
        (BathymetrySource(modes=(1, 1)), 1.0),
        (BathymetrySource(modes=(0,)), 1.0),
        (BathymetrySource(modes=(-2,)), 1.0),
        (BathymetrySource(), 0.0),
        (BathymetrySource(kind="table"), 1.0),
    ],
)
def test_invalid_sources(source: BathymetrySource, nu: float) -> None:
    with pytest.raises(ParameterError):
        build_bathymetry(source, GRID, nu)


def test_table_matches_builtin() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        path = write_table(Path(tmp) / "g.csv", exponential_rows())
        table = build_bathymetry(BathymetrySource(kind="table", table=path), GRID, 1.0)
    builtin = build_bathymetry(BathymetrySource(), GRID, 1.0)
    assert table.kind == "table"
    assert sorted(table.coefficients) == [-1, 1]
    assert np.max(np.abs(table.coefficients[1].values - builtin.coefficients[1].values)) < 1e-6
    assert table.coefficients[1].require_decay().rate == pytest.approx(1.0, rel=1e-3)
    assert table.symmetry_error() == 0.0


def test_read_table_sorts_rows() -> None:
    rows = exponential_rows()
    with tempfile.TemporaryDirectory() as tmp:
        groups = read_table(write_table(Path(tmp) / "g.csv", rows[::-1]))
    xs, values = groups[1]
    assert np.all(np.diff(xs) > 0)
    assert abs(values[0] + 0.5j) < 1e-15


@pytest.mark.parametrize(
    "rows",
    [
        exponential_rows(index=0),
        exponential_rows(real=0.1),
        [(1, x, 0.0, -0.5 * math.exp(x)) for x in np.linspace(0.0, 5.0, 41)],
    ],
)
def test_invalid_tables(rows: list[tuple[float, float, float, float]]) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        path = write_table(Path(tmp) / "g.csv", rows)
        with pytest.raises(ParameterError):
            build_bathymetry(BathymetrySource(kind="table", table=path), GRID, 1.0)


def test_missing_table() -> None:
    with tempfile.TemporaryDirectory() as tmp, pytest.raises(ParameterError):
        read_table(Path(tmp) / "missing.csv")


def test_wrong_columns() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "g.csv"
        path.write_text("l,x,re\n1,0,0\n1,1,0\n", encoding="utf-8")
        with pytest.raises(ParameterError):
            read_table(path)
