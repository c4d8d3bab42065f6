# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Birkhoff normal form of a one degree of freedom Hamiltonian at an elliptic origin.

The Hamiltonian K(P, Q) = (omega/2)(P^2 + Q^2) + (higher orders) is moved to complex coordinates
z = (P + iQ)/sqrt(2), w = (P - iQ)/sqrt(2), where {z, w} = -i and the quadratic part is omega z w.
Degree by degree a generator chi_k removes every monomial z^a w^b with a != b by a Lie transform
exp(L_chi) f = f + {f, chi} + {{f, chi}, chi}/2 + ...; what is left depends on z w = (P^2 + Q^2)/2 only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from bathyflow.errors import DegenerateEllipticityError
from bathyflow.poly2 import Poly2

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import NDArray

COMPLEX_BRACKET = -1j
"""{z, w} for z = (P + iQ)/sqrt(2), w = (P - iQ)/sqrt(2) and {f, g} = f_P g_Q - f_Q g_P."""

REMAINDER_TOLERANCE = 1e-3
SYMPLECTIC_TOLERANCE = 1e-7
SMALLEST_RADIUS_EXPONENT = 10

_ROOT2 = math.sqrt(2.0)


def to_complex(poly: Poly2) -> Poly2:
    """Substitute P = (z + w)/sqrt(2), Q = -i (z - w)/sqrt(2)."""
    z = Poly2.monomial(1, 0, poly.degree, 1.0 + 0j)
    w = Poly2.monomial(0, 1, poly.degree, 1.0 + 0j)
    return poly.compose((z + w) / _ROOT2, (z - w) * (-1j / _ROOT2))


def to_real(poly: Poly2) -> Poly2:
    """Substitute z = (P + iQ)/sqrt(2), w = (P - iQ)/sqrt(2); the imaginary part is dropped."""
    p = Poly2.monomial(1, 0, poly.degree, 1.0 + 0j)
    q = Poly2.monomial(0, 1, poly.degree, 1.0 + 0j)
    return poly.compose((p + q * 1j) / _ROOT2, (p - q * 1j) / _ROOT2).real


def lie_transform(f: Poly2, chi: Poly2, sign: float = 1.0) -> Poly2:
    """exp(sign L_chi) f with L_chi f = {f, chi}, summed until the terms vanish under truncation."""
    chi = chi.with_degree(f.degree) if chi.degree != f.degree else chi
    total = f
    term = f
    for order in range(1, f.degree + 2):
        term = term.bracket(chi, sign * COMPLEX_BRACKET) / order
        if term.is_zero():
            break
        total = total + term
    return total


def homological_generator(part: Poly2, omega: float) -> Poly2:
    """chi with {omega z w, chi} cancelling every z^a w^b, a != b, of the homogeneous `part`."""
    if omega == 0:
        errmsg = "The linear frequency vanishes; the origin is not a proper elliptic point"
        raise DegenerateEllipticityError(errmsg)
    chi = np.zeros_like(part.coeffs, dtype=np.complex128)
    for a, b in zip(*np.nonzero(part.coeffs), strict=True):
        if a != b:
            chi[a, b] = 1j * part.coeffs[a, b] / (omega * (a - b))
    return Poly2(chi, part.degree)


@dataclass(frozen=True)
class NormalFormResult:
    """omega, the radial coefficients alpha_k of (P^2 + Q^2)^(k+1), generators and the coordinate change.

    `forward` expresses the old (P, Q) as polynomials in the normalized ones, `inverse` the reverse,
    both truncated at `map_degree`.
    """

    omega: float
    lambda_ell: float
    degree: int
    alpha: tuple[float, ...]
    normal_form: Poly2
    generators: tuple[Poly2, ...]
    forward: tuple[Poly2, Poly2]
    inverse: tuple[Poly2, Poly2]
    angle_residual: float
    quadratic_coefficient: float
    radius: float = 1.0

    @property
    def map_degree(self) -> int:
        return self.forward[0].degree

    @cached_property
    def _forward_derivatives(self) -> tuple[Poly2, Poly2, Poly2, Poly2]:
        first, second = self.forward
        return first.diff(0), first.diff(1), second.diff(0), second.diff(1)

    def forward_jacobian(self, p: Any, q: Any) -> NDArray[np.float64]:
        """d(P, Q)/d(P', Q') of `forward`, shape (..., 2, 2)."""
        d = [poly(p, q) for poly in self._forward_derivatives]
        rows = [[d[0], d[1]], [d[2], d[3]]]
        return np.moveaxis(np.array(rows, dtype=np.float64), (0, 1), (-2, -1))

    def radial(self, rho: NDArray[Any] | float) -> NDArray[Any] | float:
        """The normal form as a function of rho = P^2 + Q^2."""
        total = 0.5 * self.omega * np.asarray(rho)
        for k, coefficient in enumerate(self.alpha, start=1):
            total = total + coefficient * np.asarray(rho) ** (k + 1)
        return total

    def frequency(self, rho: NDArray[Any] | float) -> NDArray[Any] | float:
        """Rotation rate 2 d/drho of the normal form at rho = P^2 + Q^2."""
        total = self.omega + 0.0 * np.asarray(rho)
        for k, coefficient in enumerate(self.alpha, start=1):
            total = total + 2.0 * (k + 1) * coefficient * np.asarray(rho) ** k
        return total

    def to_dict(self) -> dict[str, Any]:
        return {
            "omega": self.omega,
            "lambda_ell": self.lambda_ell,
            "degree": self.degree,
            "alpha": list(self.alpha),
            "angle_residual": self.angle_residual,
            "quadratic_coefficient": self.quadratic_coefficient,
            "radius": self.radius,
        }

    def with_radius(self, radius: float) -> NormalFormResult:
        return replace(self, radius=radius)


def _angle_residual(normal_form: Poly2) -> float:
    """Largest coefficient not belonging to a power of P^2 + Q^2."""
    radial = Poly2.zero(normal_form.degree)
    rho = Poly2.monomial(2, 0, normal_form.degree, 1.0) + Poly2.monomial(0, 2, normal_form.degree, 1.0)
    for k in range(1, normal_form.degree // 2 + 1):
        coefficient = normal_form.coeffs[2 * k, 0]
        radial = radial + rho**k * float(np.real(coefficient))
    return (normal_form - radial).max_abs()


def birkhoff(
    hamiltonian: Poly2,
    omega: float,
    lambda_ell: float = math.nan,
    map_degree: int | None = None,
) -> NormalFormResult:
    """Normalize `hamiltonian`, whose quadratic part must be (omega/2)(P^2 + Q^2), up to its degree."""
    degree = hamiltonian.degree
    if degree < 4:  # noqa: PLR2004
        errmsg = f"Normal form degree must be at least 4, got {degree}"
        raise ValueError(errmsg)
    map_degree = 2 * degree if map_degree is None else map_degree

    current = to_complex(hamiltonian)
    generators = []
    for k in range(3, degree + 1):
        chi = homological_generator(current.homogeneous(k), omega)
        if chi.is_zero():
            continue
        current = lie_transform(current, chi)
        generators.append(chi)
        logger.debug(f"normal form degree {k}: generator size {chi.max_abs():.3g}")

    z = Poly2.monomial(1, 0, map_degree, 1.0 + 0j)
    w = Poly2.monomial(0, 1, map_degree, 1.0 + 0j)
    forward_z, forward_w = z, w
    for chi in generators:
        forward_z, forward_w = lie_transform(forward_z, chi), lie_transform(forward_w, chi)
    inverse_z, inverse_w = z, w
    for chi in reversed(generators):
        inverse_z, inverse_w = lie_transform(inverse_z, chi, -1.0), lie_transform(inverse_w, chi, -1.0)

    def to_pq(new_z: Poly2, new_w: Poly2) -> tuple[Poly2, Poly2]:
        return to_real((new_z + new_w) / _ROOT2), to_real((new_z - new_w) * (-1j / _ROOT2))

    normal_form = to_real(current)
    alpha = tuple(
        float(np.real(current.coeffs[k + 1, k + 1])) / 2.0 ** (k + 1) for k in range(1, degree // 2)
    )
    result = NormalFormResult(
        omega=omega,
        lambda_ell=lambda_ell,
        degree=degree,
        alpha=alpha,
        normal_form=normal_form,
        generators=tuple(generators),
        forward=to_pq(forward_z, forward_w),
        inverse=to_pq(inverse_z, inverse_w),
        angle_residual=_angle_residual(normal_form),
        quadratic_coefficient=float(hamiltonian.coeffs[2, 0]),
    )
    logger.debug(f"normal form: omega={omega:.6g}, alpha={alpha}, angle residual {result.angle_residual:.3g}")
    return result


def apply_map(pair: tuple[Poly2, Poly2], p: NDArray[Any] | float, q: NDArray[Any] | float) -> tuple[Any, Any]:
    return pair[0](p, q), pair[1](p, q)


def invert_map(
    result: NormalFormResult, p: float, q: float, tolerance: float = 1e-15, max_iter: int = 30
) -> tuple[float, float]:
    """Normalized coordinates of the old point (p, q): the truncated inverse refined by Newton on `forward`."""
    guess = np.array(apply_map(result.inverse, p, q), dtype=np.float64)
    target = np.array([p, q], dtype=np.float64)
    for _ in range(max_iter):
        image = np.array(apply_map(result.forward, guess[0], guess[1]), dtype=np.float64)
        step = np.linalg.solve(result.forward_jacobian(guess[0], guess[1]), image - target)
        guess = guess - step
        if float(np.max(np.abs(step))) <= tolerance * max(1.0, float(np.max(np.abs(guess)))):
            break
    return float(guess[0]), float(guess[1])


def _disc(radius: float, rings: int = 6, angles: int = 24) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    radii = radius * np.linspace(1.0 / rings, 1.0, rings)
    theta = np.linspace(0.0, 2.0 * np.pi, angles, endpoint=False)
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    return (rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()


def validity_radius(
    result: NormalFormResult,
    exact: Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]],
) -> float:
    """Largest r = 2^-k <= 1 on whose disc the normal form reproduces `exact` (pushed through the coordinate
    change) to REMAINDER_TOLERANCE of the quadratic part and the coordinate change keeps det J within
    SYMPLECTIC_TOLERANCE of one."""
    for exponent in range(SMALLEST_RADIUS_EXPONENT + 1):
        radius = 2.0**-exponent
        p, q = _disc(radius)
        old_p, old_q = apply_map(result.forward, p, q)
        scale = 0.5 * abs(result.omega) * radius**2
        remainder = float(np.max(np.abs(exact(old_p, old_q) - result.normal_form(p, q)))) / scale
        det = result.forward[0].jacobian_det(result.forward[1], p, q)
        drift = float(np.max(np.abs(det - 1.0)))
        if remainder < REMAINDER_TOLERANCE and drift < SYMPLECTIC_TOLERANCE:
            logger.debug(f"validity radius {radius:g}: remainder {remainder:.3g}, det drift {drift:.3g}")
            return radius
    logger.warning(f"normal form validity radius fell to 2^-{SMALLEST_RADIUS_EXPONENT}")
    return 2.0**-SMALLEST_RADIUS_EXPONENT
