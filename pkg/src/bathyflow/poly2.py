# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Truncated bivariate polynomials  sum c[a, b] u^a v^b,  a + b <= degree,  with the Poisson bracket.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray


def _mask(degree: int) -> NDArray[np.bool_]:
    index = np.arange(degree + 1)
    return np.add.outer(index, index) <= degree


class Poly2:
    """Dense coefficient array c[a, b] of u^a v^b, truncated at total degree `degree`."""

    __slots__ = ("coeffs", "degree")

    def __init__(self, coeffs: ArrayLike, degree: int | None = None) -> None:
        array = np.atleast_2d(np.asarray(coeffs))
        if degree is None:
            degree = max(array.shape) - 1
        if degree < 0:
            errmsg = f"Polynomial degree must be >= 0, got {degree}"
            raise ValueError(errmsg)
        dtype = np.complex128 if np.iscomplexobj(array) else np.float64
        full = np.zeros((degree + 1, degree + 1), dtype=dtype)
        rows, cols = min(array.shape[0], degree + 1), min(array.shape[1], degree + 1)
        full[:rows, :cols] = array[:rows, :cols]
        full[~_mask(degree)] = 0
        self.coeffs: NDArray[Any] = full
        self.degree = degree

    @classmethod
    def zero(cls, degree: int, dtype: Any = np.float64) -> Poly2:
        return cls(np.zeros((degree + 1, degree + 1), dtype=dtype), degree)

    @classmethod
    def monomial(cls, a: int, b: int, degree: int, coefficient: complex | float = 1.0) -> Poly2:
        coeffs = np.zeros((degree + 1, degree + 1), dtype=np.complex128 if isinstance(coefficient, complex) else float)
        if a + b <= degree:
            coeffs[a, b] = coefficient
        return cls(coeffs, degree)

    @classmethod
    def variable(cls, axis: int, degree: int) -> Poly2:
        return cls.monomial(1 - axis, axis, degree)

    @classmethod
    def univariate(cls, series: ArrayLike, axis: int, degree: int) -> Poly2:
        """sum series[k] u^k (axis 0) or v^k (axis 1)."""
        values = np.asarray(series)
        coeffs = np.zeros((degree + 1, degree + 1), dtype=values.dtype)
        count = min(len(values), degree + 1)
        if axis == 0:
            coeffs[:count, 0] = values[:count]
        else:
            coeffs[0, :count] = values[:count]
        return cls(coeffs, degree)

    def with_degree(self, degree: int) -> Poly2:
        return Poly2(self.coeffs, degree)

    def _coerce(self, other: Poly2 | complex | float) -> Poly2:
        if isinstance(other, Poly2):
            if other.degree != self.degree:
                return other.with_degree(self.degree)
            return other
        return Poly2.monomial(0, 0, self.degree, other)

    def __add__(self, other: Poly2 | complex | float) -> Poly2:
        return Poly2(self.coeffs + self._coerce(other).coeffs, self.degree)

    __radd__ = __add__

    def __sub__(self, other: Poly2 | complex | float) -> Poly2:
        return Poly2(self.coeffs - self._coerce(other).coeffs, self.degree)

    def __rsub__(self, other: complex | float) -> Poly2:
        return Poly2(self._coerce(other).coeffs - self.coeffs, self.degree)

    def __neg__(self) -> Poly2:
        return Poly2(-self.coeffs, self.degree)

    def __mul__(self, other: Poly2 | complex | float) -> Poly2:
        if not isinstance(other, Poly2):
            return Poly2(self.coeffs * other, self.degree)
        product = convolve2d(self.coeffs, self._coerce(other).coeffs)
        return Poly2(product[: self.degree + 1, : self.degree + 1], self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other: complex | float) -> Poly2:
        return Poly2(self.coeffs / other, self.degree)

    def __pow__(self, power: int) -> Poly2:
        result = Poly2.monomial(0, 0, self.degree, 1.0)
        for _ in range(power):
            result = result * self
        return result

    def __call__(self, u: ArrayLike, v: ArrayLike) -> NDArray[Any]:
        return npoly.polyval2d(np.asarray(u), np.asarray(v), self.coeffs)

    def __repr__(self) -> str:
        terms = [f"{self.coeffs[a, b]:+.6g} u^{a} v^{b}" for a, b in zip(*np.nonzero(self.coeffs), strict=True)]
        return f"Poly2(degree={self.degree}: {' '.join(terms) or '0'})"

    def diff(self, axis: int) -> Poly2:
        if self.degree == 0:
            return Poly2.zero(0, self.coeffs.dtype)
        return Poly2(npoly.polyder(self.coeffs, axis=axis), self.degree)

    def bracket(self, other: Poly2, scale: complex | float = 1.0) -> Poly2:
        """scale * (f_u g_v - f_v g_u)."""
        other = self._coerce(other)
        result = self.diff(0) * other.diff(1) - self.diff(1) * other.diff(0)
        return result * scale if scale != 1.0 else result

    def homogeneous(self, k: int) -> Poly2:
        """The part of total degree exactly k."""
        index = np.arange(self.degree + 1)
        keep = np.add.outer(index, index) == k
        return Poly2(np.where(keep, self.coeffs, 0), self.degree)

    def compose(self, u: Poly2, v: Poly2) -> Poly2:
        """self(u(s, t), v(s, t)), truncated at u's degree."""
        degree = u.degree
        v = v.with_degree(degree) if v.degree != degree else v
        u_powers = [Poly2.monomial(0, 0, degree, 1.0)]
        v_powers = [Poly2.monomial(0, 0, degree, 1.0)]
        for _ in range(self.degree):
            u_powers.append(u_powers[-1] * u)
            v_powers.append(v_powers[-1] * v)
        result = Poly2.zero(degree, np.result_type(self.coeffs, u.coeffs, v.coeffs))
        for a, b in zip(*np.nonzero(self.coeffs), strict=True):
            result = result + (u_powers[a] * v_powers[b]) * self.coeffs[a, b]
        return result

    @property
    def real(self) -> Poly2:
        return Poly2(self.coeffs.real.copy(), self.degree)

    @property
    def imag(self) -> Poly2:
        return Poly2(self.coeffs.imag.copy(), self.degree)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def jacobian_det(self, other: Poly2, u: ArrayLike, v: ArrayLike) -> NDArray[Any]:
        """det d(self, other)/d(u, v) at the points."""
        return self.diff(0)(u, v) * other.diff(1)(u, v) - self.diff(1)(u, v) * other.diff(0)(u, v)


def sin_series(degree: int) -> NDArray[np.float64]:
    return np.array([0.0 if k % 2 == 0 else (-1.0) ** (k // 2) / math.factorial(k) for k in range(degree + 1)])


def cos_series(degree: int) -> NDArray[np.float64]:
    return np.array([(-1.0) ** (k // 2) / math.factorial(k) if k % 2 == 0 else 0.0 for k in range(degree + 1)])
