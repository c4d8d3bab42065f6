# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np
import pytest

from bathyflow.errors import SolverRefusedError
from bathyflow.mode_ode import (
    OdeCase,
    bound_certificate,
    classify,
    derivative_of_solution,
    dump_mode,
    residual,
    solve_mode,
)
from bathyflow.sampled import DecayEnvelope, SampledCoefficient, make_grid

GRID = make_grid(1.0, 2048)


def forcing(rate: float = 1.0, grid: np.ndarray = GRID) -> SampledCoefficient:
    values = np.exp(-rate * grid).astype(np.complex128)
    return SampledCoefficient(grid, values, -rate * values, DecayEnvelope(1.0, rate), "R")


def test_classify() -> None:
    assert classify(1.0, 5.0).case is OdeCase.HYP
    assert classify(1.0, 5.0).delta == 2.0
    osc = classify(1.5, 2.0)
    assert osc.case is OdeCase.OSC
    assert osc.delta == pytest.approx(0.5j)
    res = classify(1.0, 1.0 + 1e-12)
    assert res.case is OdeCase.RES
    assert res.r1 == res.r2 == 1j


@pytest.mark.parametrize(
    ("alpha", "beta_sq", "exact"),
    [
        # decaying solutions of B'' - 2 i alpha B' - beta^2 B = exp(-x)
        (1.0, 5.0, lambda x: (-0.2 - 0.1j) * np.exp(-x) + (0.125 + 0.125j) * np.exp((1j - 2.0) * x)),
        (1.5, 2.0, lambda x: (-0.1 - 0.3j) * np.exp(-x)),
        (1.0, 1.0, lambda x: -0.5j * np.exp(-x)),
    ],
    ids=["HYP", "OSC", "RES"],
)
def test_closed_form(alpha: float, beta_sq: float, exact: object) -> None:
    coeffs = classify(alpha, beta_sq)
    R = forcing()  # noqa: N806
    sol = solve_mode(coeffs, R, label="B")
    assert np.max(np.abs(sol.B.values - exact(GRID))) < 1e-7  # type: ignore[operator]
    assert residual(sol, coeffs, R) < 1e-6
    assert np.allclose(derivative_of_solution(sol, coeffs, R), sol.B.require_derivative(), rtol=0, atol=1e-12)
    assert sol.B.require_decay().rate == pytest.approx(1.0, rel=1e-3)


def test_hyperbolic_constants() -> None:
    sol = solve_mode(classify(1.0, 5.0), forcing())
    assert sol.K2 == 0j
    # K1 = -1 / (2 delta (lambda + 1)) with lambda = i + 2
    assert abs(sol.K1 - (-1.0 / (4.0 * (3.0 + 1j)))) < 1e-8


def test_resonant_constants() -> None:
    sol = solve_mode(classify(1.0, 1.0), forcing())
    # K1 = int y exp(-i y) exp(-y) dy, K2 = -int exp(-i y) exp(-y) dy
    assert abs(sol.K1 - 1.0 / (1.0 + 1j) ** 2) < 1e-8
    assert abs(sol.K2 - (-0.5 + 0.5j)) < 1e-8
    assert abs(sol.K1 - sol.B.values[0]) < 1e-12


@pytest.mark.parametrize("gap", [1e-8, -1e-8], ids=["HYP", "OSC"])
def test_cases_meet_at_resonance(gap: float) -> None:
    R = forcing()  # noqa: N806
    resonant = solve_mode(classify(1.0, 1.0), R).B.values
    coeffs = classify(1.0, 1.0 + gap, tol_case=1e-9)
    assert coeffs.case is (OdeCase.HYP if gap > 0 else OdeCase.OSC)
    values = solve_mode(coeffs, R).B.values
    if coeffs.case is OdeCase.HYP:
        # K2 = 0 keeps the homogeneous k exp(r2 x), with |k| ~ 1/delta
        k = -1.0 / (2.0 * coeffs.delta * (coeffs.r2 + 1.0))
        assert abs(k) > 1e3
        values = values - k * np.exp(coeffs.r2 * GRID)
    assert np.max(np.abs(values - resonant)) < 1e-4


@pytest.mark.parametrize(("alpha", "beta_sq"), [(1.0, 5.0), (1.5, 2.0), (1.0, 1.0)], ids=["HYP", "OSC", "RES"])
def test_residual_shrinks_with_grid(alpha: float, beta_sq: float) -> None:
    coeffs = classify(alpha, beta_sq)
    errors = []
    for size in (512, 1024):
        grid = make_grid(1.0, size)
        R = forcing(grid=grid)  # noqa: N806
        errors.append(residual(solve_mode(coeffs, R), coeffs, R))
    assert errors[1] > 0.0
    assert errors[0] / errors[1] >= 4.0  # noqa: PLR2004


@pytest.mark.parametrize(("alpha", "beta_sq"), [(1.0, 5.0), (1.5, 2.0), (1.0, 1.0)], ids=["HYP", "OSC", "RES"])
def test_derivative_matches_differences(alpha: float, beta_sq: float) -> None:
    coeffs = classify(alpha, beta_sq)
    R = forcing()  # noqa: N806
    sol = solve_mode(coeffs, R)
    h = GRID[1] - GRID[0]
    centered = np.gradient(sol.B.values, GRID)
    stored = derivative_of_solution(sol, coeffs, R)
    assert np.max(np.abs(centered[1:-1] - stored[1:-1])) < h**2


@pytest.mark.parametrize(("alpha", "beta_sq"), [(1.0, 5.0), (1.5, 2.0)], ids=["HYP", "OSC"])
def test_tail_cut_at_tolerance(alpha: float, beta_sq: float) -> None:
    """A forcing cut where it falls below TOL_TAIL of its peak solves as well as one on a longer grid."""
    coeffs = classify(alpha, beta_sq)

    def solve_on(x_max: float) -> np.ndarray:
        grid = make_grid(1.0, round(x_max / 0.01) + 1, x_max)
        values = grid * np.exp(-grid)
        R = SampledCoefficient.from_samples(grid, values, (1.0 - grid) * np.exp(-grid), "R")  # noqa: N806
        return solve_mode(coeffs, R).B.values

    with pytest.raises(SolverRefusedError, match="extend grid"):
        solve_on(14.0)
    short, long = solve_on(18.0), solve_on(36.0)
    assert np.max(np.abs(short[:1001] - long[:1001])) < 1e-6


def test_bound_certificate() -> None:
    coeffs = classify(1.0, 5.0)
    sol = solve_mode(coeffs, forcing())
    certificate = bound_certificate(sol, coeffs, M=1.0, nu=1.0, rho_hat=0.5)
    assert certificate.passed
    assert certificate.decay_ok
    assert certificate.value_margin > 1.0
    assert certificate.to_dict()["passed"] is True


def test_bound_certificate_violation() -> None:
    coeffs = classify(1.0, 5.0)
    sol = solve_mode(coeffs, forcing())
    # a forcing bound far below the actual forcing cannot cover the solution
    certificate = bound_certificate(sol, coeffs, M=1e-6, nu=1.0, rho_hat=0.5)
    assert not certificate.passed


def test_zero_forcing() -> None:
    R = SampledCoefficient.zeros(GRID)  # noqa: N806
    coeffs = classify(1.0, 5.0)
    sol = solve_mode(coeffs, R)
    assert sol.B.is_zero
    assert sol.K1 == sol.K2 == 0j
    assert residual(sol, coeffs, R) == 0.0


def test_slow_tail_refused() -> None:
    with pytest.raises(SolverRefusedError, match="extend grid"):
        solve_mode(classify(1.0, 5.0), forcing(rate=0.1))


def test_missing_envelope_refused() -> None:
    values = np.exp(-GRID).astype(np.complex128)
    with pytest.raises(SolverRefusedError):
        solve_mode(classify(1.0, 5.0), SampledCoefficient(GRID, values))


def test_non_uniform_grid_refused() -> None:
    grid = np.concatenate((np.linspace(0.0, 10.0, 100), np.linspace(10.5, 20.0, 50)))
    with pytest.raises(SolverRefusedError, match="uniform"):
        solve_mode(classify(1.0, 5.0), forcing(grid=grid))


def test_dump_mode() -> None:
    sol = solve_mode(classify(1.5, 2.0), forcing())
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "mode.csv"
        dump_mode(path, sol.B)
        table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape == (len(GRID), 5)
    assert np.allclose(table[:, 1] + 1j * table[:, 2], sol.B.values)
