# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

from __future__ import annotations

from pathlib import Path

import pytest

from bathyflow.run_config import (
    BLOCKS,
    DEMO_CHANNEL,
    RunConfig,
    WaveBlock,
    load_run_config,
    run_config_from_dict,
)

DEMO_CONFIG = Path(__file__).parent.parent / "configs" / "demo.json"


def test_defaults_are_the_demo_run() -> None:
    config = RunConfig()
    assert config.channel == DEMO_CHANNEL
    assert config.wave == WaveBlock(2, 1, 2.0)
    assert config.wave_params.kappa == 2  # noqa: PLR2004
    assert config.bathymetry.kind == "builtin"
    assert BLOCKS == ("channel", "wave", "bathymetry", "run", "outputs")


def test_empty_dict_gives_defaults() -> None:
    assert run_config_from_dict({}) == RunConfig()


def test_partial_blocks_merge_over_defaults() -> None:
    config = run_config_from_dict({"channel": {"mu": 1e-4}, "run": {"J_max": 1, "mu_sweep": [1e-3, 1e-4]}})
    assert config.channel.mu == 1e-4  # noqa: PLR2004
    assert config.channel.Fcal == DEMO_CHANNEL.Fcal
    assert config.run.J_max == 1
    assert config.run.mu_sweep == (1e-3, 1e-4)
    assert config.run.h == RunConfig().run.h


def test_integer_channel_values_become_floats() -> None:
    config = run_config_from_dict({"channel": {"F": 1, "nu": 2}})
    assert isinstance(config.channel.F, float)
    assert config.channel.nu == 2.0  # noqa: PLR2004


@pytest.mark.parametrize(
    ("data", "message"),
    [
        ({"channel": {"beta": 1.0}}, "Unknown keys"),
        ({"wave": {"kappa": 2, "omega": 1.0}}, "Unknown keys"),
        ({"run": 3}, "table/object"),
        ({"run": {"h": -0.1}}, "run.h"),
        ({"run": {"T": 0}}, "run.T"),
        ({"run": {"tol_tail": float("nan")}}, "run.tol_tail"),
        ({"run": {"probe_horizons": [100.0, -1.0]}}, "run.probe_horizons"),
        ({"run": {"mu_sweep": [0.0]}}, "run.mu_sweep"),
        ({"run": {"J_max": -1}}, "J_max"),
        ({"run": {"grid_size": 8}}, "grid_size"),
        ({"bathymetry": {"kind": "table", "table": "missing.csv"}}, "does not exist"),
        ({"outputs": {"formats": ["yaml"]}}, "Table formats"),
    ],
)
def test_invalid_blocks(data: dict[str, object], message: str) -> None:
    with pytest.raises(ValueError, match=message):
        run_config_from_dict(data)


def test_table_path_resolves_against_base_dir(tmp_path: Path) -> None:
    (tmp_path / "g.csv").write_text("l,x,re_g,im_g\n", encoding="utf-8")
    config = run_config_from_dict({"bathymetry": {"kind": "table", "table": "g.csv"}}, tmp_path)
    assert config.bathymetry.table == tmp_path / "g.csv"
    assert config.to_dict()["bathymetry"]["table"] == str(tmp_path / "g.csv")


def test_with_mu_and_with_output() -> None:
    config = RunConfig()
    changed = config.with_mu(1e-3).with_output(Path("elsewhere"))
    assert changed.channel.mu == 1e-3  # noqa: PLR2004
    assert changed.channel.d == config.channel.d
    assert changed.outputs.directory == Path("elsewhere")
    assert config.channel.mu == DEMO_CHANNEL.mu


def test_to_dict_is_plain() -> None:
    data = RunConfig().to_dict()
    assert set(data) == set(BLOCKS)
    assert data["outputs"]["directory"] == "bathyflow-out"
    assert data["bathymetry"]["table"] is None
    assert run_config_from_dict(data) == RunConfig()


def test_load_demo_config() -> None:
    config = load_run_config(DEMO_CONFIG)
    assert config.channel == DEMO_CHANNEL
    assert config.wave == WaveBlock()
    assert config.run.J_max == 3  # noqa: PLR2004
    assert config.run.probe_horizons == (100.0, 1000.0)


def test_load_missing_config_is_demo(tmp_path: Path) -> None:
    assert load_run_config(None) == RunConfig()
    assert load_run_config(tmp_path / "absent.toml") == RunConfig()


def test_load_toml_ignores_other_sections(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('[bathyflow]\nloglevel = "DEBUG"\n\n[channel]\nmu = 0.0001\n\n[wave]\nA = 1.5\n', encoding="utf-8")
    config = load_run_config(path)
    assert config.channel.mu == 1e-4  # noqa: PLR2004
    assert config.wave.A == 1.5  # noqa: PLR2004
    assert config.run == RunConfig().run


def test_outputs_formats() -> None:
    assert RunConfig().outputs.formats == ("csv",)
    config = run_config_from_dict({"outputs": {"formats": ["json", "csv"]}})
    assert config.outputs.formats == ("json", "csv")
    assert load_run_config(DEMO_CONFIG).outputs.formats == ("csv", "json")
