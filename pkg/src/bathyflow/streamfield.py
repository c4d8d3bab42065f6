# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Evaluation of the reconstructed streamfunction psi = psi_0 + psi~ and its gradient at channel points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from bathyflow.errors import DomainError, SymmetryViolationError
from bathyflow.sampled import fit_decay

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from bathyflow.hierarchy import ExpansionState, Mode

IMAGINARY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Gradient:
    psi: NDArray[np.float64]
    psi_x: NDArray[np.float64]
    psi_y: NDArray[np.float64]
    psi_t: NDArray[np.float64]


def _real(values: NDArray[np.complex128], what: str) -> NDArray[np.float64]:
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    residue = float(np.max(np.abs(values.imag), initial=0.0))
    if residue > IMAGINARY_TOLERANCE * scale:
        errmsg = f"Reconstructed {what} has an imaginary part of {residue:.3g}"
        raise SymmetryViolationError(errmsg)
    return np.asarray(values.real, dtype=np.float64)


class StreamField:
    """psi_0 in closed form plus the layers 1..J summed per mode and interpolated in x.

    Beyond the grid each mode continues with its own fitted exponential envelope.
    """

    def __init__(self, state: ExpansionState, J: int | None = None) -> None:  # noqa: N803
        self.state = state
        self.J = state.J if J is None else J
        if not 0 <= self.J <= state.J:
            errmsg = f"Reconstruction order {self.J} outside 0..{state.J}"
            raise ValueError(errmsg)
        grid = state.grid
        totals: dict[Mode, tuple[NDArray[np.complex128], NDArray[np.complex128]]] = {}
        for layer in state.layers[1 : self.J + 1]:
            for mode, coefficient in layer.coefficients.items():
                values, deriv = totals.get(mode, (np.zeros(len(grid), complex), np.zeros(len(grid), complex)))
                totals[mode] = (values + coefficient.values, deriv + coefficient.require_derivative())
        self.modes: tuple[Mode, ...] = tuple(sorted(totals))
        self._m = np.array([m for m, _ in self.modes], dtype=np.float64)
        self._sigma = np.array([state.wave.sigma_of(n) for _, n in self.modes], dtype=np.float64)
        self._values = np.array([totals[mode][0] for mode in self.modes]).reshape(len(self.modes), len(grid))
        self._deriv = np.array([totals[mode][1] for mode in self.modes]).reshape(len(self.modes), len(grid))
        self._rates = np.array([fit_decay(grid, row).rate for row in self._values])
        self._deriv_decay = [fit_decay(grid, row) for row in self._deriv]
        self._value_decay = [fit_decay(grid, row) for row in self._values]

    @property
    def is_zero(self) -> bool:
        return not self.modes

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.state.grid, self._values, self._deriv, axis=1)

    @cached_property
    def _spline_deriv(self) -> CubicHermiteSpline:
        return self._spline.derivative()

    def _profiles(self, xs: NDArray[np.float64]) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        """Summed mode values and x-derivatives at xs, shape (modes, points)."""
        if np.any(xs < 0):
            errmsg = "Streamfunction evaluated at x < 0 (outside the channel)"
            raise DomainError(errmsg)
        grid = self.state.grid
        x_max = float(grid[-1])
        values = np.zeros((len(self.modes), len(xs)), dtype=np.complex128)
        deriv = np.zeros_like(values)
        inside = xs <= x_max
        if np.any(inside):
            values[:, inside] = self._spline(xs[inside])
            deriv[:, inside] = self._spline_deriv(xs[inside])
        if not np.all(inside):
            beyond = xs[~inside] - x_max
            finite = np.isfinite(self._rates)
            damping = np.zeros((len(self.modes), len(beyond)))
            damping[finite] = np.exp(-self._rates[finite, None] * beyond[None, :])
            values[:, ~inside] = self._values[:, -1:] * damping
            deriv[:, ~inside] = self._deriv[:, -1:] * damping
        return values, deriv

    def _wave(self, x: NDArray[np.float64], y: NDArray[np.float64], t: NDArray[np.float64]) -> Gradient:
        wave = self.state.wave
        sine, cosine = np.sin(wave.m_tilde * y), np.cos(wave.m_tilde * y)
        phase = wave.kappa * x + wave.sigma * t
        return Gradient(
            wave.A * sine * np.cos(phase),
            -wave.A * wave.kappa * sine * np.sin(phase),
            wave.A * wave.m_tilde * cosine * np.cos(phase),
            -wave.A * wave.sigma * sine * np.sin(phase),
        )

    def gradient(self, x: ArrayLike, y: ArrayLike, t: ArrayLike, include_wave: bool = True) -> Gradient:
        """psi and its x, y, t derivatives, broadcast over x, y, t."""
        xb, yb, tb = np.broadcast_arrays(
            np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), np.asarray(t, dtype=np.float64)
        )
        shape = xb.shape
        xs, ys, ts = xb.ravel(), yb.ravel(), tb.ravel()
        if self.J > 0 and self.modes:
            values, deriv = self._profiles(xs)
            phase = np.exp(1j * (self._m[:, None] * ys[None, :] + self._sigma[:, None] * ts[None, :]))
            terms = values * phase
            psi = _real(terms.sum(axis=0), "streamfunction")
            psi_x = _real((deriv * phase).sum(axis=0), "streamfunction x-derivative")
            psi_y = _real((1j * self._m[:, None] * terms).sum(axis=0), "streamfunction y-derivative")
            psi_t = _real((1j * self._sigma[:, None] * terms).sum(axis=0), "streamfunction t-derivative")
        else:
            if np.any(xs < 0):
                errmsg = "Streamfunction evaluated at x < 0 (outside the channel)"
                raise DomainError(errmsg)
            psi = psi_x = psi_y = psi_t = np.zeros(len(xs))
        if include_wave:
            wave = self._wave(xs, ys, ts)
            psi, psi_x, psi_y, psi_t = psi + wave.psi, psi_x + wave.psi_x, psi_y + wave.psi_y, psi_t + wave.psi_t
        return Gradient(psi.reshape(shape), psi_x.reshape(shape), psi_y.reshape(shape), psi_t.reshape(shape))

    def __call__(self, x: ArrayLike, y: ArrayLike, t: ArrayLike, include_wave: bool = True) -> NDArray[np.float64]:
        return self.gradient(x, y, t, include_wave).psi

    def gradient_envelope(self, x: float) -> float:
        """An upper bound of sup over y, t and x' >= x of |psi~_x| + |psi~_y|, from the fitted mode envelopes."""
        if self.J == 0 or not self.modes:
            return 0.0
        where = max(float(x), 0.0)
        total = 0.0
        for m, value_decay, deriv_decay in zip(self._m, self._value_decay, self._deriv_decay, strict=True):
            rate = min(value_decay.rate, deriv_decay.rate)
            if np.isinf(rate):
                continue
            total += (abs(m) * value_decay.amplitude + deriv_decay.amplitude) * float(np.exp(-rate * where))
        return total

    @property
    def slowest_rate(self) -> float:
        """Smallest fitted decay rate over the summed modes and their derivatives (inf when psi~ vanishes)."""
        rates = [decay.rate for decay in self._value_decay + self._deriv_decay if decay.amplitude > 0]
        return min(rates, default=float("inf"))


def reconstruct(
    state: ExpansionState,
    x: ArrayLike,
    y: ArrayLike,
    t: ArrayLike,
    J: int | None = None,  # noqa: N803
) -> NDArray[np.float64]:
    """psi up to order J at (x, y, t)."""
    return StreamField(state, J)(x, y, t)


def reconstruct_gradient(
    state: ExpansionState,
    x: ArrayLike,
    y: ArrayLike,
    t: ArrayLike,
    J: int | None = None,  # noqa: N803
) -> Gradient:
    return StreamField(state, J).gradient(x, y, t)


def boundary_flux(field: StreamField, samples: int = 1000) -> float:
    """max |psi_x| on the walls y = 0 and y = 2 pi over a deterministic (x, t) lattice."""
    x_max = float(field.state.grid[-1])
    xs = np.linspace(0.0, x_max, samples)
    ts = np.linspace(0.0, 10.0, samples)[::-1]
    worst = 0.0
    for wall in (0.0, 2.0 * np.pi):
        worst = max(worst, float(np.max(np.abs(field.gradient(xs, wall, ts).psi_x))))
    return worst
