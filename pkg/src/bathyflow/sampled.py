# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Sampled functions of the streamwise coordinate x on the semi-infinite channel.

A SampledCoefficient stores complex samples on a strictly increasing grid on [0, X_max], optionally the samples
of the x-derivative (produced analytically by the solver that built it) and an exponential decay envelope used
both as metadata and to extend the function beyond X_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from bathyflow.errors import DomainError, SolverRefusedError

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

DEFAULT_GRID_SIZE = 2048


def make_grid(nu: float, size: int = DEFAULT_GRID_SIZE, x_max: float | None = None) -> NDArray[np.float64]:
    """Uniform grid on [0, X_max] with X_max = max(10, 20/nu) unless given."""
    if size < 2:
        errmsg = f"A grid needs at least 2 points, got {size}"
        raise ValueError(errmsg)
    if x_max is None:
        if nu <= 0:
            errmsg = f"The decay rate must be positive to size the grid, got nu={nu}"
            raise ValueError(errmsg)
        x_max = max(10.0, 20.0 / nu)
    return np.linspace(0.0, float(x_max), size)


@dataclass(frozen=True)
class DecayEnvelope:
    """|f(x)| <= amplitude * exp(-rate * x)."""

    amplitude: float
    rate: float

    def bound(self, x: ArrayLike) -> NDArray[np.float64]:
        xs = np.asarray(x, dtype=np.float64)
        if self.amplitude == 0.0 or np.isinf(self.rate):
            return np.zeros_like(xs)
        return self.amplitude * np.exp(-self.rate * xs)


def fit_decay(grid: NDArray[np.float64], values: NDArray[Any]) -> DecayEnvelope:
    """Least squares fit of log|values| over the last quarter of the grid.

    The amplitude is raised until the envelope covers every sample.
    """
    magnitude = np.abs(values)
    nonzero = magnitude > 0.0
    if not np.any(nonzero):
        return DecayEnvelope(0.0, np.inf)

    start = (3 * len(grid)) // 4
    tail_x = grid[start:][nonzero[start:]]
    tail_mag = magnitude[start:][nonzero[start:]]
    if len(tail_x) < 2:
        return DecayEnvelope(float(np.max(magnitude)), np.inf)

    slope, _ = np.polyfit(tail_x, np.log(tail_mag), 1)
    rate = float(-slope)
    log_amplitude = np.max(np.log(magnitude[nonzero]) + rate * grid[nonzero])
    return DecayEnvelope(float(np.exp(log_amplitude)), rate)


@dataclass(frozen=True, eq=False)
class SampledCoefficient:
    """One Fourier coefficient function of x, with co-stored derivative samples and decay envelope."""

    grid: NDArray[np.float64]
    values: NDArray[np.complex128]
    deriv_values: NDArray[np.complex128] | None = None
    decay: DecayEnvelope | None = None
    label: str = field(default="")

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or len(grid) < 2:
            errmsg = f"Sampled coefficient {self.label!r} needs a 1-d grid with at least 2 points"
            raise ValueError(errmsg)
        if values.shape != grid.shape:
            errmsg = f"Sampled coefficient {self.label!r}: {values.shape} values for {grid.shape} grid points"
            raise ValueError(errmsg)
        if not np.all(np.diff(grid) > 0):
            errmsg = f"Sampled coefficient {self.label!r}: grid must be strictly increasing"
            raise ValueError(errmsg)
        if grid[0] < 0:
            errmsg = f"Sampled coefficient {self.label!r}: grid must start at x >= 0"
            raise ValueError(errmsg)
        if self.deriv_values is not None:
            deriv = np.asarray(self.deriv_values, dtype=np.complex128)
            if deriv.shape != grid.shape:
                errmsg = f"Sampled coefficient {self.label!r}: derivative samples do not match the grid"
                raise ValueError(errmsg)
            object.__setattr__(self, "deriv_values", deriv)

    @classmethod
    def zeros(cls, grid: NDArray[np.float64], label: str = "") -> SampledCoefficient:
        zero = np.zeros(len(grid), dtype=np.complex128)
        return cls(grid, zero, zero.copy(), DecayEnvelope(0.0, np.inf), label)

    @classmethod
    def from_samples(
        cls,
        grid: NDArray[np.float64],
        values: NDArray[Any],
        deriv_values: NDArray[Any] | None = None,
        label: str = "",
    ) -> SampledCoefficient:
        """Build a coefficient and fit its decay envelope from the samples."""
        decay = fit_decay(np.asarray(grid, dtype=np.float64), np.asarray(values))
        return cls(grid, values, deriv_values, decay, label)

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    @property
    def has_derivative(self) -> bool:
        return self.deriv_values is not None

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values) and (self.deriv_values is None or not np.any(self.deriv_values))

    @cached_property
    def interpolant(self) -> CubicSpline | CubicHermiteSpline:
        if self.deriv_values is not None:
            return CubicHermiteSpline(self.grid, self.values, self.deriv_values)
        return CubicSpline(self.grid, self.values)

    @cached_property
    def _derivative_interpolant(self) -> Any:
        return self.interpolant.derivative()

    def require_decay(self) -> DecayEnvelope:
        if self.decay is None:
            errmsg = f"Sampled coefficient {self.label!r} carries no decay envelope"
            raise SolverRefusedError(errmsg)
        return self.decay

    def require_derivative(self) -> NDArray[np.complex128]:
        if self.deriv_values is None:
            errmsg = f"Sampled coefficient {self.label!r} carries no derivative samples"
            raise SolverRefusedError(errmsg)
        return self.deriv_values

    def __call__(self, x: ArrayLike) -> NDArray[np.complex128]:
        return self.evaluate(x)

    def evaluate(self, x: ArrayLike) -> NDArray[np.complex128]:
        """Cubic interpolation on [0, X_max], exponential envelope beyond."""
        return self._evaluate(x, self.interpolant, complex(self.values[-1]))

    def derivative(self, x: ArrayLike) -> NDArray[np.complex128]:
        """The x-derivative: the interpolant's derivative on [0, X_max], the envelope's slope beyond."""
        if self.deriv_values is not None:
            end = complex(self.deriv_values[-1])
        else:
            end = complex(self._derivative_interpolant(self.x_max))
        return self._evaluate(x, self._derivative_interpolant, end)

    def _evaluate(self, x: ArrayLike, inner: Any, end_value: complex) -> NDArray[np.complex128]:
        xs = np.asarray(x, dtype=np.float64)
        if np.any(xs < 0):
            errmsg = f"Sampled coefficient {self.label!r} evaluated at x < 0 (outside the channel)"
            raise DomainError(errmsg)
        out = np.zeros(xs.shape, dtype=np.complex128)
        inside = xs <= self.x_max
        if np.any(inside):
            out[inside] = inner(xs[inside])
        if not np.all(inside):
            rate = self.require_decay().rate
            if np.isfinite(rate):
                out[~inside] = end_value * np.exp(-rate * (xs[~inside] - self.x_max))
        return out

    def sup_weighted(self, rate: float, weight: float = 1.0) -> float:
        """max over the grid of max(weight*|f|, |f'|) * exp(rate * x)."""
        scale = np.exp(rate * self.grid)
        value_sup = weight * np.max(np.abs(self.values) * scale)
        if self.deriv_values is None:
            return float(value_sup)
        return float(max(value_sup, np.max(np.abs(self.deriv_values) * scale)))
