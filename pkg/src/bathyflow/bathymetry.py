# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Fourier representation of the bottom perturbation g(x, y) = sum_l g_l(x) exp(i l y).

Only the l > 0 half is built; the l < 0 half is mirrored as g_{-l} = -g_l, which together with
g_{-l} = conj(g_l) forces every g_l to be purely imaginary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
from loguru import logger

from bathyflow.errors import ParameterError
from bathyflow.sampled import DecayEnvelope, SampledCoefficient, fit_decay

if TYPE_CHECKING:
    from collections.abc import Mapping

    from numpy.typing import NDArray

BathymetryKind = Literal["builtin", "table", "flat"]

TABLE_COLUMNS = ("l", "x", "re", "im")
REAL_PART_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BathymetrySource:
    """What to build: a builtin a*exp(-nu x)*sum sin(l y) family, a CSV table, or a flat bottom."""

    kind: BathymetryKind = "builtin"
    amplitude: float = 1.0
    nu: float | None = None
    modes: tuple[int, ...] = (1,)
    table: Path | None = None


@dataclass(frozen=True)
class BathymetrySpec:
    """The constructed coefficients g_l, l != 0, sharing one grid."""

    kind: BathymetryKind
    grid: NDArray[np.float64]
    coefficients: Mapping[int, SampledCoefficient] = field(default_factory=dict)

    @property
    def is_flat(self) -> bool:
        return all(coefficient.is_zero for coefficient in self.coefficients.values())

    @property
    def support_radius(self) -> int:
        return max((abs(index) for index in self.coefficients), default=0)

    def symmetry_error(self) -> float:
        """max over l and the grid of |g_l + g_{-l}| and |g_{-l} - conj(g_l)|."""
        worst = 0.0
        for index, coefficient in self.coefficients.items():
            mirror = self.coefficients.get(-index)
            if mirror is None:
                return float("inf")
            worst = max(
                worst,
                float(np.max(np.abs(coefficient.values + mirror.values))),
                float(np.max(np.abs(mirror.values - np.conj(coefficient.values)))),
            )
        return worst

    def weighted_norm(self, rho: float, nu: float) -> float:
        """sup over the grid of sum_l |g_l(x)| exp(|l| rho) exp(nu x)."""
        if not self.coefficients:
            return 0.0
        total = np.zeros(len(self.grid))
        for index, coefficient in self.coefficients.items():
            total += np.abs(coefficient.values) * np.exp(abs(index) * rho)
        return float(np.max(total * np.exp(nu * self.grid)))


def _mirrored(grid: NDArray[np.float64], half: dict[int, SampledCoefficient]) -> dict[int, SampledCoefficient]:
    coefficients: dict[int, SampledCoefficient] = {}
    for index, coefficient in sorted(half.items()):
        coefficients[index] = coefficient
        coefficients[-index] = SampledCoefficient(
            grid,
            -coefficient.values,
            -coefficient.require_derivative(),
            coefficient.decay,
            f"g[{-index}]",
        )
    return coefficients


def _builtin(source: BathymetrySource, grid: NDArray[np.float64], nu: float) -> dict[int, SampledCoefficient]:
    if isinstance(source.amplitude, complex):
        errmsg = f"Builtin bathymetry amplitude must be real, got {source.amplitude}"
        raise ParameterError(errmsg)
    if nu <= 0:
        errmsg = f"Builtin bathymetry needs a positive decay rate, got nu={nu}"
        raise ParameterError(errmsg)
    if len(set(source.modes)) != len(source.modes) or any(index <= 0 for index in source.modes):
        errmsg = f"Builtin bathymetry modes must be distinct positive integers, got {source.modes}"
        raise ParameterError(errmsg)

    # a exp(-nu x) sin(l y) = a exp(-nu x) (e^{ily} - e^{-ily}) / 2i
    profile = -0.5 * source.amplitude * np.exp(-nu * grid)
    half = {}
    for index in source.modes:
        values = np.zeros(len(grid), dtype=np.complex128)
        values.imag = profile
        half[index] = SampledCoefficient(
            grid, values, -nu * values, DecayEnvelope(0.5 * abs(source.amplitude), nu), f"g[{index}]"
        )
    return _mirrored(grid, half)


def read_table(path: Path) -> dict[int, tuple[NDArray[np.float64], NDArray[np.complex128]]]:
    """Rows (l, x, re, im) with a header line, grouped by l > 0 and sorted by x."""
    if not path.is_file():
        errmsg = f"Bathymetry table not found: {path}"
        raise ParameterError(errmsg)
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, comments="#")
    if rows.shape[1] != len(TABLE_COLUMNS):
        errmsg = f"Bathymetry table {path} must have the columns {', '.join(TABLE_COLUMNS)}"
        raise ParameterError(errmsg)

    groups: dict[int, tuple[NDArray[np.float64], NDArray[np.complex128]]] = {}
    for index in np.unique(rows[:, 0]):
        if index != int(index) or index <= 0:
            errmsg = f"Bathymetry table {path}: mode index must be a positive integer, got {index}"
            raise ParameterError(errmsg)
        block = rows[rows[:, 0] == index]
        block = block[np.argsort(block[:, 1])]
        groups[int(index)] = (block[:, 1], block[:, 2] + 1j * block[:, 3])
    return groups


def _from_table(path: Path, grid: NDArray[np.float64]) -> dict[int, SampledCoefficient]:
    half = {}
    for index, (xs, values) in read_table(path).items():
        scale = float(np.max(np.abs(values))) if len(values) else 0.0
        if scale > 0 and np.max(np.abs(values.real)) > REAL_PART_TOLERANCE * scale:
            errmsg = f"Bathymetry table {path}: g[{index}] must be purely imaginary"
            raise ParameterError(errmsg)
        imaginary = np.zeros(len(xs), dtype=np.complex128)
        imaginary.imag = values.imag
        table = SampledCoefficient.from_samples(xs, imaginary, label=f"table g[{index}]")
        if table.require_decay().rate <= 0:
            errmsg = f"Bathymetry table {path}: g[{index}] has a non-decaying tail (fitted rate {table.decay})"
            raise ParameterError(errmsg)

        sampled = np.zeros(len(grid), dtype=np.complex128)
        sampled.imag = table(grid).imag
        slope = np.zeros(len(grid), dtype=np.complex128)
        slope.imag = table.derivative(grid).imag
        half[index] = SampledCoefficient(grid, sampled, slope, fit_decay(grid, sampled), f"g[{index}]")
    return _mirrored(grid, half)


def build_bathymetry(source: BathymetrySource, grid: NDArray[np.float64], nu: float) -> BathymetrySpec:
    """Construct the mirrored coefficient set on the grid; nu is used when the source carries none."""
    rate = source.nu if source.nu is not None else nu
    if source.kind == "flat" or (source.kind == "builtin" and (source.amplitude == 0 or not source.modes)):
        coefficients: dict[int, SampledCoefficient] = {}
    elif source.kind == "builtin":
        coefficients = _builtin(source, grid, rate)
    elif source.kind == "table":
        if source.table is None:
            errmsg = "A table bathymetry needs a table file"
            raise ParameterError(errmsg)
        coefficients = _from_table(source.table, grid)
    else:
        errmsg = f"Unknown bathymetry kind {source.kind!r}"
        raise ParameterError(errmsg)

    spec = BathymetrySpec("flat" if not coefficients else source.kind, grid, coefficients)
    logger.debug(f"bathymetry {spec.kind}: modes {sorted(coefficients)}, symmetry error {spec.symmetry_error()}")
    return spec
