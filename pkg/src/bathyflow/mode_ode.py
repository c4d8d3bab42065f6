# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Solver for one Fourier mode of the hierarchy:

    B'' - 2 i alpha B' - beta^2 B = R(x),   x >= 0,

by variation of parameters with the integration constants that leave only the decaying solution.
The characteristic roots are r1 = i alpha + delta and r2 = i alpha - delta, delta = sqrt(beta^2 - alpha^2).

Every improper integral has the shape  int K(x - y) R(y) dy  with an exponential kernel, so it is
evaluated for all grid points at once: a 4-point Gauss-Legendre rule per cell against the cubic interpolant
of R gives the cell contributions, a first order recurrence (scipy.signal.lfilter) accumulates them, and the
part beyond the last node is integrated analytically against R's decay envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.signal import lfilter

from bathyflow.errors import SolverRefusedError
from bathyflow.model import TOL_CASE, DeltaBounds, ode_constant
from bathyflow.sampled import SampledCoefficient, fit_decay

if TYPE_CHECKING:
    from numpy.typing import NDArray

TOL_TAIL = 1e-6
RESIDUAL_SKIP = 16

_NODES, _WEIGHTS = leggauss(4)
# on [0, 1]
_S = 0.5 * (_NODES + 1.0)
_W = 0.5 * _WEIGHTS


class OdeCase(StrEnum):
    OSC = "OSC"
    RES = "RES"
    HYP = "HYP"


@dataclass(frozen=True)
class OdeCoefficients:
    alpha: float
    beta_sq: float
    delta: complex
    case: OdeCase

    @property
    def r1(self) -> complex:
        return 1j * self.alpha + self.delta

    @property
    def r2(self) -> complex:
        return 1j * self.alpha - self.delta


@dataclass(frozen=True)
class OdeSolution:
    B: SampledCoefficient
    I1: SampledCoefficient
    I2: SampledCoefficient
    K1: complex
    K2: complex


def classify(alpha: float, beta_sq: float, tol_case: float = TOL_CASE) -> OdeCoefficients:
    """Case of the characteristic roots; delta on the principal square root branch."""
    gap = beta_sq - alpha * alpha
    if abs(gap) < tol_case:
        return OdeCoefficients(alpha, beta_sq, 0j, OdeCase.RES)
    if gap > 0:
        return OdeCoefficients(alpha, beta_sq, complex(math.sqrt(gap)), OdeCase.HYP)
    return OdeCoefficients(alpha, beta_sq, complex(0.0, math.sqrt(-gap)), OdeCase.OSC)


@dataclass(frozen=True)
class _Quadrature:
    """Cell data shared by every kernel integral of one right hand side."""

    grid: NDArray[np.float64]
    h: float
    nodes: NDArray[np.complex128]  # R at the Gauss nodes, shape (cells, 4)
    end_value: complex
    end_rate: float

    @classmethod
    def of(cls, R: SampledCoefficient) -> _Quadrature:  # noqa: N803
        grid = R.grid
        steps = np.diff(grid)
        h = float(steps[0])
        if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            errmsg = f"Mode solver needs a uniform grid ({R.label})"
            raise SolverRefusedError(errmsg)
        nodes = R.interpolant(grid[:-1, None] + h * _S[None, :])
        return cls(grid, h, np.asarray(nodes, dtype=np.complex128), complex(R.values[-1]), R.require_decay().rate)

    def _tail_factor(self, lam: complex, power: int) -> complex:
        """int_0^inf s^(power-1) exp(-(lam + r) s) ds * R(X) for the part beyond the grid."""
        if self.end_value == 0 or math.isinf(self.end_rate):
            return 0j
        total = lam + self.end_rate
        if total.real <= 0:
            errmsg = f"Kernel exp(-{lam} s) does not damp a tail decaying at rate {self.end_rate}"
            raise SolverRefusedError(errmsg)
        return complex(self.end_value / total**power)

    def tail(self, lam: complex) -> NDArray[np.complex128]:
        """T(x_k) = int_{x_k}^inf exp(-lam (y - x_k)) R(y) dy."""
        a = np.exp(-lam * self.h)
        cells = self.h * (self.nodes * np.exp(-lam * self.h * _S)) @ _W
        end = self._tail_factor(lam, 1)
        reverse, _ = lfilter([1.0], [1.0, -a], cells[::-1], zi=np.array([a * end]))
        return np.concatenate((reverse[::-1], [end]))

    def prefix(self, lam: complex) -> NDArray[np.complex128]:
        """P(x_k) = int_0^{x_k} exp(-lam (x_k - y)) R(y) dy."""
        a = np.exp(-lam * self.h)
        cells = self.h * (self.nodes * np.exp(-lam * self.h * (1.0 - _S))) @ _W
        forward, _ = lfilter([1.0], [1.0, -a], cells, zi=np.array([0j]))
        return np.concatenate(([0j], forward))

    def first_moment(self, lam: complex, tail: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """T1(x_k) = int_{x_k}^inf (y - x_k) exp(-lam (y - x_k)) R(y) dy, given T from `tail`."""
        a = np.exp(-lam * self.h)
        cells = self.h * (self.nodes * (self.h * _S) * np.exp(-lam * self.h * _S)) @ _W
        inputs = cells + a * self.h * tail[1:]
        end = self._tail_factor(lam, 2)
        reverse, _ = lfilter([1.0], [1.0, -a], inputs[::-1], zi=np.array([a * end]))
        return np.concatenate((reverse[::-1], [end]))


def _zero_solution(grid: NDArray[np.float64], label: str) -> OdeSolution:
    zero = SampledCoefficient.zeros(grid, label)
    return OdeSolution(zero, SampledCoefficient.zeros(grid), SampledCoefficient.zeros(grid), 0j, 0j)


def _check_tail(R: SampledCoefficient, tol_tail: float) -> None:  # noqa: N803
    scale = float(np.max(np.abs(R.values)))
    ratio = abs(R.values[-1]) / scale
    if ratio > tol_tail:
        errmsg = (
            f"Right hand side {R.label!r} is still {ratio:.3g} of its maximum at x={R.x_max:g}"
            f" (tolerance {tol_tail:g}): extend grid"
        )
        raise SolverRefusedError(errmsg)


def solve_mode(
    coeffs: OdeCoefficients,
    R: SampledCoefficient,  # noqa: N803
    tol_tail: float = TOL_TAIL,
    label: str = "",
) -> OdeSolution:
    """The decaying solution B together with its two constituent integrals and constants."""
    R.require_decay()
    grid = R.grid
    if not np.any(R.values):
        return _zero_solution(grid, label)
    _check_tail(R, tol_tail)

    quad = _Quadrature.of(R)
    alpha, delta = coeffs.alpha, coeffs.delta
    if coeffs.case is OdeCase.HYP:
        part1 = -quad.tail(coeffs.r1) / (2 * delta)
        part2 = -quad.prefix(-coeffs.r2) / (2 * delta)
        K1, K2 = complex(part1[0]), 0j  # noqa: N806
        values = part1 + part2
        deriv = 1j * alpha * values + delta * (part1 - part2)
    elif coeffs.case is OdeCase.OSC:
        part1 = -quad.tail(coeffs.r1) / (2 * delta)
        part2 = quad.tail(coeffs.r2) / (2 * delta)
        K1, K2 = complex(part1[0]), complex(part2[0])  # noqa: N806
        values = part1 + part2
        deriv = 1j * alpha * values + delta * (part1 - part2)
    else:
        tail = quad.tail(1j * alpha)
        moment = quad.first_moment(1j * alpha, tail)
        part1 = moment + grid * tail
        part2 = -grid * tail
        values = moment
        deriv = 1j * alpha * values - tail
        K1, K2 = complex(values[0]), -complex(tail[0])  # noqa: N806

    B = SampledCoefficient(grid, values, deriv, fit_decay(grid, values), label)  # noqa: N806
    logger.debug(f"mode {label or '?'}: case {coeffs.case}, K1={K1:.6g}, K2={K2:.6g}")
    return OdeSolution(
        B,
        SampledCoefficient.from_samples(grid, part1, label=f"{label} I1"),
        SampledCoefficient.from_samples(grid, part2, label=f"{label} I2"),
        K1,
        K2,
    )


def derivative_of_solution(
    sol: OdeSolution,
    coeffs: OdeCoefficients,
    R: SampledCoefficient,  # noqa: N803
) -> NDArray[np.complex128]:
    """B' from the stored parts: i alpha B + delta (I1 - I2), or i alpha B - T in the resonant case."""
    if coeffs.case is not OdeCase.RES:
        return 1j * coeffs.alpha * sol.B.values + coeffs.delta * (sol.I1.values - sol.I2.values)
    if not np.any(R.values):
        return np.zeros(len(sol.B.grid), dtype=np.complex128)
    tail = _Quadrature.of(R).tail(1j * coeffs.alpha)
    return 1j * coeffs.alpha * sol.B.values - tail


def residual(
    sol: OdeSolution,
    coeffs: OdeCoefficients,
    R: SampledCoefficient,  # noqa: N803
    skip: int = RESIDUAL_SKIP,
) -> float:
    """sup over interior nodes of |B'' - 2 i alpha B' - beta^2 B - R|, B'' from a spline of the B' samples."""
    deriv = sol.B.require_derivative()
    grid = sol.B.grid
    if not np.any(deriv) and not np.any(sol.B.values) and not np.any(R.values):
        return 0.0
    second = CubicSpline(grid, deriv).derivative()(grid)
    defect = second - 2j * coeffs.alpha * deriv - coeffs.beta_sq * sol.B.values - R.values
    interior = slice(skip, len(grid) - skip) if len(grid) > 2 * skip + 1 else slice(None)
    return float(np.max(np.abs(defect[interior])))


@dataclass(frozen=True)
class BoundCertificate:
    """The decay bounds of one mode solution; a failure is a diagnostic, not an error."""

    G: float
    resonant_constant: float
    value_margin: float
    deriv_margin: float
    decay_rate: float
    decay_ok: bool

    @property
    def passed(self) -> bool:
        return self.value_margin >= 1.0 and self.deriv_margin >= 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "G": self.G,
            "resonant_constant": self.resonant_constant,
            "value_margin": self.value_margin,
            "deriv_margin": self.deriv_margin,
            "decay_rate": self.decay_rate,
            "decay_ok": self.decay_ok,
            "passed": self.passed,
        }


def _margin(bound: NDArray[np.float64], actual: NDArray[np.float64]) -> float:
    nonzero = actual > 0
    if not np.any(nonzero):
        return math.inf
    return float(np.min(bound[nonzero] / actual[nonzero]))


def bound_certificate(
    sol: OdeSolution,
    coeffs: OdeCoefficients,
    M: float,  # noqa: N803
    nu: float,
    rho_hat: float,
    bounds: DeltaBounds | None = None,
) -> BoundCertificate:
    """|B| <= G M e^{-nu x/2} / (nu^3 (1 + |delta|)) and |B'| <= G M e^{-nu x/2} on the grid.

    Without `bounds` the widths are taken from this mode alone.
    """
    if bounds is None:
        width = abs(coeffs.delta)
        bounds = DeltaBounds(width if width > 0 else 1.0, 0, width if coeffs.case is OdeCase.OSC else 0.0)
    constant = ode_constant(coeffs.alpha, nu, bounds)
    grid = sol.B.grid
    envelope = constant * M * np.exp(-0.5 * nu * grid)
    value_margin = _margin(envelope / (nu**3 * (1.0 + abs(coeffs.delta))), np.abs(sol.B.values))
    deriv_margin = _margin(envelope, np.abs(sol.B.require_derivative()))
    growth = math.exp((abs(coeffs.alpha) + 2.0 * nu) * rho_hat)
    resonant_constant = 16.0 * M * (1.0 + abs(coeffs.alpha)) * growth / nu**3
    rate = sol.B.require_decay().rate
    certificate = BoundCertificate(constant, resonant_constant, value_margin, deriv_margin, rate, rate >= 0.5 * nu)
    if not certificate.passed:
        logger.warning(f"bound certificate of {sol.B.label or 'mode'} violated: {certificate.to_dict()}")
    return certificate


def dump_mode(path: Path, B: SampledCoefficient) -> None:  # noqa: N803
    """Write x, Re B, Im B, Re B', Im B' as CSV."""
    deriv = B.require_derivative()
    table = np.column_stack((B.grid, B.values.real, B.values.imag, deriv.real, deriv.imag))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=",", fmt="%.17g", header="x,re_b,im_b,re_db,im_db", comments="")
