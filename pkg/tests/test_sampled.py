# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import numpy as np
import pytest

from bathyflow.errors import DomainError, SolverRefusedError
from bathyflow.sampled import DecayEnvelope, SampledCoefficient, fit_decay, make_grid


def exponential(nu: float = 1.0, size: int = 2048) -> SampledCoefficient:
    grid = make_grid(nu, size)
    values = np.exp(-nu * grid).astype(np.complex128)
    return SampledCoefficient(grid, values, -nu * values, DecayEnvelope(1.0, nu), "exp")


def test_make_grid_extent() -> None:
    assert make_grid(1.0, 11)[-1] == 20.0
    assert make_grid(4.0, 11)[-1] == 10.0
    assert make_grid(1.0, 11, x_max=3.0)[-1] == 3.0
    with pytest.raises(ValueError):  # NOQA: PT011
        make_grid(1.0, 1)
    with pytest.raises(ValueError):  # NOQA: PT011
        make_grid(0.0)


def test_fit_decay_exponential() -> None:
    grid = make_grid(0.5, 1024)
    envelope = fit_decay(grid, 3.0 * np.exp(-0.5 * grid))
    assert envelope.rate == pytest.approx(0.5, rel=1e-9)
    assert envelope.amplitude == pytest.approx(3.0, rel=1e-9)


def test_fit_decay_zero() -> None:
    grid = make_grid(1.0, 64)
    envelope = fit_decay(grid, np.zeros(64))
    assert envelope.amplitude == 0.0
    assert np.isinf(envelope.rate)
    assert not np.any(envelope.bound(grid))


def test_envelope_covers_samples() -> None:
    grid = make_grid(1.0, 512)
    values = np.exp(-grid) * (1.0 + 0.5 * np.sin(3.0 * grid))
    envelope = fit_decay(grid, values)
    assert np.all(envelope.bound(grid) >= np.abs(values) * (1 - 1e-12))


def test_interpolation_between_nodes() -> None:
    coefficient = exponential()
    xs = np.linspace(0.0, 19.9, 777)
    assert np.max(np.abs(coefficient(xs) - np.exp(-xs))) < 1e-7
    assert np.max(np.abs(coefficient.derivative(xs) + np.exp(-xs))) < 1e-5


def test_envelope_beyond_grid() -> None:
    coefficient = exponential()
    xs = np.array([25.0, 30.0])
    assert np.allclose(coefficient(xs), np.exp(-xs), rtol=1e-9, atol=0)


def test_negative_x_is_outside_the_channel() -> None:
    with pytest.raises(DomainError):
        exponential()(-0.1)


def test_missing_envelope_and_derivative() -> None:
    grid = make_grid(1.0, 16)
    bare = SampledCoefficient(grid, np.ones(16))
    assert not bare.has_derivative
    with pytest.raises(SolverRefusedError):
        bare.require_decay()
    with pytest.raises(SolverRefusedError):
        bare.require_derivative()
    with pytest.raises(SolverRefusedError):
        bare(np.array([30.0]))


def test_zeros() -> None:
    zero = SampledCoefficient.zeros(make_grid(1.0, 16))
    assert zero.is_zero
    assert zero.sup_weighted(2.0) == 0.0
    assert not np.any(zero(np.array([1.0, 100.0])))


@pytest.mark.parametrize(
    ("grid", "values"),
    [
        (np.array([0.0]), np.array([1.0])),
        (np.array([0.0, 1.0, 2.0]), np.array([1.0, 2.0])),
        (np.array([0.0, 2.0, 1.0]), np.zeros(3)),
        (np.array([-1.0, 0.0, 1.0]), np.zeros(3)),
    ],
)
def test_invalid_samples(grid: np.ndarray, values: np.ndarray) -> None:
    with pytest.raises(ValueError):  # NOQA: PT011
        SampledCoefficient(grid, values)


def test_sup_weighted() -> None:
    coefficient = exponential()
    # |f| e^{x} = 1 everywhere, |f'| = |f|
    assert coefficient.sup_weighted(1.0) == pytest.approx(1.0, rel=1e-12)
    assert coefficient.sup_weighted(1.0, weight=0.5) == pytest.approx(1.0, rel=1e-12)
