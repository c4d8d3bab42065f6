# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from bathyflow.bathymetry import BathymetrySource, BathymetrySpec, build_bathymetry
from bathyflow.errors import HierarchyDivergenceError, SolverRefusedError, ValidationError
from bathyflow.hierarchy import (
    ExpansionState,
    ModeSet,
    bracket,
    bracket_values,
    cross_check_layer,
    pde_residual,
    run_hierarchy,
    state_from_layers,
    zeroth_layer,
)
from bathyflow.model import ChannelParams, WaveParams
from bathyflow.run_config import DEMO_CHANNEL
from bathyflow.sampled import SampledCoefficient, make_grid

if TYPE_CHECKING:
    from collections.abc import Mapping

GRID = make_grid(1.0, 512)
WAVE = WaveParams.from_channel(DEMO_CHANNEL, kappa=2, m_tilde=1, A=2.0)


def bathymetry(**kwargs: object) -> BathymetrySpec:
    return build_bathymetry(BathymetrySource(**kwargs), GRID, 1.0)  # type: ignore[arg-type]


@pytest.fixture(scope="module")
def demo_state() -> ExpansionState:
    return run_hierarchy(DEMO_CHANNEL, WAVE, bathymetry(), J_max=2, jobs=2)


def test_mode_set() -> None:
    modes = ModeSet(2, 3)
    assert len(modes.modes) == 8
    assert (-2, -3) in modes
    assert (0, 3) not in modes
    assert (1, 2) not in modes
    assert "mode" not in modes
    assert ModeSet.for_run(WAVE, bathymetry(modes=(1, 2)), 3).M_max == 1 + 3 * 2


def test_zeroth_layer() -> None:
    layer = zeroth_layer(WAVE, GRID)
    assert set(layer.coefficients) == {(1, 2), (-1, 2), (1, -2), (-1, -2)}
    assert layer.eps == pytest.approx(1.0)
    assert layer.symmetry_error() == 0.0
    assert np.allclose(layer.coefficients[(1, 2)].values, 0.5 / 1j * np.exp(2j * GRID))
    assert zeroth_layer(WaveParams(2, 1, 0.0, -2.0), GRID).coefficients == {}


def test_bracket_matches_physical_jacobian() -> None:
    """[f, g]_m is the m-th Fourier coefficient of (f_y g_x - f_x g_y) / i."""
    f_seq = zeroth_layer(WAVE, GRID).row(2)
    g_seq = bathymetry(amplitude=0.8, modes=(1, 2)).coefficients
    values = bracket_values(f_seq, g_seq)
    ys = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    k = 37

    def physical(seq: Mapping[int, SampledCoefficient]) -> tuple[np.ndarray, np.ndarray]:
        field_x = sum(c.require_derivative()[k] * np.exp(1j * index * ys) for index, c in seq.items())
        field_y = sum(1j * index * c.values[k] * np.exp(1j * index * ys) for index, c in seq.items())
        return np.asarray(field_x), np.asarray(field_y)

    f_x, f_y = physical(f_seq)
    g_x, g_y = physical(g_seq)
    jacobian = f_y * g_x - f_x * g_y
    spectrum = np.fft.fft(jacobian) / len(ys)
    for m in range(-4, 5):
        expected = spectrum[m % len(ys)] / 1j
        got = values[m][k] if m in values else 0.0
        assert abs(got - expected) < 1e-14


def random_sequence(rng: np.random.Generator, grid: np.ndarray) -> dict[int, SampledCoefficient]:
    support = [index for index in range(-3, 4) if rng.random() < 0.6]
    size = len(grid)
    return {
        index: SampledCoefficient(
            grid,
            rng.normal(size=size) + 1j * rng.normal(size=size),
            rng.normal(size=size) + 1j * rng.normal(size=size),
        )
        for index in support
    }


def test_bracket_matches_double_loop() -> None:
    rng = np.random.default_rng(11)
    grid = make_grid(1.0, 16)
    for _ in range(50):
        f_seq, g_seq = random_sequence(rng, grid), random_sequence(rng, grid)
        values = bracket_values(f_seq, g_seq)
        for m in range(-6, 7):
            expected = np.zeros(len(grid), dtype=np.complex128)
            for index in range(-3, 4):
                f, g = f_seq.get(index), g_seq.get(index)
                if f is not None and m - index in g_seq:
                    expected += index * f.values * g_seq[m - index].require_derivative()
                if g is not None and m - index in f_seq:
                    expected -= index * g.values * f_seq[m - index].require_derivative()
            got = values.get(m, np.zeros(len(grid)))
            assert np.max(np.abs(got - expected)) < 1e-12
        assert set(values) <= set(range(-6, 7))
        self_bracket = bracket_values(f_seq, f_seq)
        assert all(np.max(np.abs(term)) < 1e-12 for term in self_bracket.values())



def test_bracket_sampled() -> None:
    f_seq = zeroth_layer(WAVE, GRID).row(2)
    g_seq = bathymetry().coefficients
    assert bracket(f_seq, g_seq, 2).label == "[f,g]_2"
    assert bracket(f_seq, g_seq, 7).is_zero
    with pytest.raises(SolverRefusedError):
        bracket({}, {}, 1)


def test_bracket_needs_one_grid() -> None:
    other = build_bathymetry(BathymetrySource(), make_grid(1.0, 256), 1.0)
    with pytest.raises(SolverRefusedError, match="different grids"):
        bracket_values(zeroth_layer(WAVE, GRID).row(2), other.coefficients)


def test_flat_bottom_stops_early() -> None:
    state = run_hierarchy(DEMO_CHANNEL, WAVE, bathymetry(kind="flat"), J_max=3)
    assert state.J == 1
    assert state.stopped_early
    assert state.eps[1] == 0.0
    assert state.layers[1].coefficients == {}


def test_threshold_enforced() -> None:
    channel = DEMO_CHANNEL.with_mu(0.05)
    with pytest.raises(ValidationError):
        run_hierarchy(channel, WAVE, bathymetry(), J_max=1)
    with pytest.raises(ValueError):  # NOQA: PT011
        run_hierarchy(DEMO_CHANNEL, WAVE, bathymetry(), J_max=-1)


def test_divergence() -> None:
    channel = ChannelParams(F=1.0, Fcal=-6.0, d=1e4, mu=1e3, nu=1.0, Mcal=2.0)
    with pytest.raises(HierarchyDivergenceError) as e:
        run_hierarchy(channel, WAVE, bathymetry(), J_max=3, enforce_threshold=False)
    assert e.value.report["ratios"][0] > 1
    assert e.value.report["ratios"][1] > 1


def test_demo_layers(demo_state: ExpansionState) -> None:
    assert demo_state.J == 2
    assert demo_state.mode_set.M_max == 3
    assert demo_state.layers[1].support == {2, -2}
    assert demo_state.layers[2].support <= {1, -1, 3, -3}
    assert all(0 < ratio < 1e-4 for ratio in demo_state.ratios)
    report = demo_state.report()
    assert report["symmetry_error"] <= 1e-12
    assert max(report["cross_check"]) <= 1e-10
    assert report["certified"] is True
    assert report["eps_bound"][0] == report["eps"][0]
    assert demo_state.a_priori_bound() > 0


def test_cross_check_layer(demo_state: ExpansionState) -> None:
    assert cross_check_layer(demo_state, 1) <= 1e-10
    assert cross_check_layer(demo_state, 2) <= 1e-10
    with pytest.raises(ValueError):  # NOQA: PT011
        cross_check_layer(demo_state, 0)


def test_pde_residual_order(demo_state: ExpansionState) -> None:
    truncated = pde_residual(demo_state, J=0)
    full = pde_residual(demo_state)
    assert truncated > 1e-10
    assert full < 1e-12
    with pytest.raises(ValueError):  # NOQA: PT011
        pde_residual(demo_state, J=5)


def test_state_from_layers(demo_state: ExpansionState) -> None:
    layers = [dict(layer.coefficients) for layer in demo_state.layers]
    rebuilt = state_from_layers(demo_state.channel, demo_state.wave, demo_state.bathymetry, layers)
    assert rebuilt.J == demo_state.J
    assert rebuilt.eps == pytest.approx(demo_state.eps, rel=1e-12)
    assert rebuilt.mode_set.M_max == 3
