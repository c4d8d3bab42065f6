# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from bathyflow.artifacts import (
    LAYER_COLUMNS,
    check_formats,
    read_json,
    read_layers,
    to_plain,
    write_chain_trace,
    write_json,
    write_lattice,
    write_layers,
    write_poincare,
    write_trajectory,
)
from bathyflow.bathymetry import BathymetrySource, build_bathymetry
from bathyflow.dynamics import Trajectory
from bathyflow.hierarchy import ExpansionState, run_hierarchy, state_from_layers
from bathyflow.model import WaveParams
from bathyflow.run_config import DEMO_CHANNEL
from bathyflow.sampled import make_grid
from bathyflow.streamfield import StreamField

GRID = make_grid(1.0, 256)
WAVE = WaveParams.from_channel(DEMO_CHANNEL, kappa=2, m_tilde=1, A=2.0)
CHANNEL = DEMO_CHANNEL.with_mu(1e-3)


@pytest.fixture(scope="module")
def small_state() -> ExpansionState:
    bathymetry = build_bathymetry(BathymetrySource(), GRID, 1.0)
    return run_hierarchy(CHANNEL, WAVE, bathymetry, J_max=1, enforce_threshold=False)


def read_rows(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").splitlines()


def test_to_plain() -> None:
    data = {
        "rate": np.float64(0.25),
        "inf": float("inf"),
        "nan": np.float64("nan"),
        "count": np.int64(3),
        "ok": np.bool_(True),
        "vector": np.array([1.0, 2.0]),
        "pair": (1, Path("out")),
        7: "seven",
    }
    plain = to_plain(data)
    assert plain == {
        "rate": 0.25,
        "inf": "inf",
        "nan": "nan",
        "count": 3,
        "ok": True,
        "vector": [1.0, 2.0],
        "pair": [1, "out"],
        "7": "seven",
    }
    assert type(plain["count"]) is int
    assert type(plain["ok"]) is bool


def test_json_round_trip(tmp_path: Path) -> None:
    path = write_json(tmp_path / "sub" / "summary.json", {"ratio": np.float64(0.5), "passed": np.bool_(False)})
    assert path.is_file()
    assert read_json(path) == {"ratio": 0.5, "passed": False}


def test_layers_round_trip(tmp_path: Path, small_state: ExpansionState) -> None:
    path = write_layers(tmp_path / "layers.csv", small_state)
    assert read_rows(path)[0] == ",".join(LAYER_COLUMNS)
    layers = read_layers(path, len(small_state.layers))
    assert len(layers) == len(small_state.layers)
    for stored, layer in zip(layers, small_state.layers, strict=True):
        assert set(stored) == set(layer.coefficients)
        for mode, coefficient in layer.coefficients.items():
            assert np.array_equal(stored[mode].grid, coefficient.grid)
            assert np.array_equal(stored[mode].values, coefficient.values)
            assert np.array_equal(stored[mode].require_derivative(), coefficient.require_derivative())
    rebuilt = state_from_layers(CHANNEL, WAVE, small_state.bathymetry, layers)
    assert len(rebuilt.layers) == len(small_state.layers)


def test_layers_file_is_deterministic(tmp_path: Path, small_state: ExpansionState) -> None:
    first = write_layers(tmp_path / "a.csv", small_state)
    second = write_layers(tmp_path / "b.csv", small_state)
    assert first.read_bytes() == second.read_bytes()


def test_header_only_layers(tmp_path: Path) -> None:
    path = tmp_path / "layers.csv"
    path.write_text(",".join(LAYER_COLUMNS) + "\n", encoding="utf-8")
    assert read_layers(path, 2) == [{}, {}]


def test_layers_with_bad_order(tmp_path: Path) -> None:
    path = tmp_path / "layers.csv"
    rows = [f"3,1,0,{x},0,0,0,0" for x in (0.0, 0.5, 1.0)]
    path.write_text("\n".join([",".join(LAYER_COLUMNS), *rows]) + "\n", encoding="utf-8")
    with pytest.raises(ValueError, match="outside"):
        read_layers(path, 2)


def test_layers_with_wrong_columns(tmp_path: Path) -> None:
    path = tmp_path / "layers.csv"
    path.write_text("j,m,n,x\n0,1,0,0.0\n0,1,0,1.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="expected columns"):
        read_layers(path, 1)


def test_write_trajectory(tmp_path: Path) -> None:
    times = np.array([0.0, 0.5, 1.0])
    states = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
    trajectory = Trajectory(times, states, np.array([1.0, 1.0, 1.0]))
    path = write_trajectory(tmp_path / "trajectory.csv", trajectory, ("I", "phi"))
    rows = read_rows(path)
    assert rows[0] == "t,I,phi,conserved"
    assert len(rows) == 4  # noqa: PLR2004
    assert rows[2] == "0.5,0.29999999999999999,0.40000000000000002,1"


def test_write_poincare(tmp_path: Path) -> None:
    section = np.array([[0.0, 0.3], [6.283185307179586, 0.3]])
    assert read_rows(write_poincare(tmp_path / "poincare.csv", section))[1:] == ["0,0.29999999999999999"] + [
        "6.2831853071795862,0.29999999999999999"
    ]
    assert read_rows(write_poincare(tmp_path / "empty.csv", np.empty((0, 2)))) == ["t,I"]


def test_write_chain_trace(tmp_path: Path) -> None:
    row = {"I": 0.1, "phi": 0.0, "x": 0.0, "y": 1.0, "I_back": 0.1, "phi_back": 0.0, "error": 0.0}
    rows = read_rows(write_chain_trace(tmp_path / "chain.csv", [row, row]))
    assert rows[0] == "I,phi,x,y,I_back,phi_back,error"
    assert len(rows) == 3  # noqa: PLR2004


def test_write_lattice(tmp_path: Path, small_state: ExpansionState) -> None:
    field = StreamField(small_state)
    xs, ys = np.array([0.0, 1.0, 2.0]), np.array([0.5, 1.5])
    path = write_lattice(tmp_path / "psi.csv", field, xs, ys, 0.25)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    assert table.shape == (6, 4)
    assert np.allclose(table[:, 3] - table[:, 2], StreamField(small_state, J=0)(table[:, 0], table[:, 1], 0.25))


def test_table_formats(tmp_path: Path) -> None:
    section = np.array([[0.0, 0.3], [6.283185307179586, 0.3]])
    first = write_poincare(tmp_path / "poincare.csv", section, ("json", "csv"))
    assert first == tmp_path / "poincare.json"
    assert read_json(first) == {"columns": ["t", "I"], "rows": [[0.0, 0.3], [6.283185307179586, 0.3]]}
    assert (tmp_path / "poincare.csv").is_file()
    only_json = write_poincare(tmp_path / "only" / "poincare.csv", section, ("json",))
    assert only_json.suffix == ".json"
    assert not (tmp_path / "only" / "poincare.csv").exists()


def test_check_formats() -> None:
    assert check_formats(["csv", "json", "csv"]) == ("csv", "json")
    with pytest.raises(ValueError, match="Table formats"):
        check_formats([])
    with pytest.raises(ValueError, match="Table formats"):
        check_formats(["csv", "parquet"])
