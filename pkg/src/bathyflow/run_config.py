# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
The run configuration: channel, wave, bathymetry, run and outputs blocks read from a JSON or TOML file.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

from loguru import logger

from bathyflow.artifacts import check_formats
from bathyflow.bathymetry import BathymetrySource
from bathyflow.cli.config_file import ConfigFile
from bathyflow.mode_ode import TOL_TAIL
from bathyflow.model import TOL_CASE, ChannelParams, WaveParams
from bathyflow.sampled import DEFAULT_GRID_SIZE

if TYPE_CHECKING:
    from collections.abc import Mapping

BLOCKS = ("channel", "wave", "bathymetry", "run", "outputs")

DEMO_CHANNEL = ChannelParams(F=1.0, Fcal=-6.0, d=0.01, mu=1e-8, nu=1.0, Mcal=2.0, rho=0.5)


@dataclass(frozen=True)
class WaveBlock:
    kappa: int = 2
    m_tilde: int = 1
    A: float = 2.0

    def params(self, channel: ChannelParams) -> WaveParams:
        return WaveParams.from_channel(channel, self.kappa, self.m_tilde, self.A)


@dataclass(frozen=True)
class RunBlock:
    J_max: int = 3
    M_max: int | None = None
    grid_size: int = DEFAULT_GRID_SIZE
    x_max: float | None = None
    tol_case: float = TOL_CASE
    tol_tail: float = TOL_TAIL
    nf_degree: int = 6
    h: float = 0.01
    T: float = 100.0
    probe_horizons: tuple[float, ...] = (100.0, 1000.0)
    mu_sweep: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4)


@dataclass(frozen=True)
class OutputsBlock:
    directory: Path = Path("bathyflow-out")
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams = DEMO_CHANNEL
    wave: WaveBlock = field(default_factory=WaveBlock)
    bathymetry: BathymetrySource = field(default_factory=BathymetrySource)
    run: RunBlock = field(default_factory=RunBlock)
    outputs: OutputsBlock = field(default_factory=OutputsBlock)

    @property
    def wave_params(self) -> WaveParams:
        return self.wave.params(self.channel)

    def with_mu(self, mu: float) -> RunConfig:
        return replace(self, channel=self.channel.with_mu(mu))

    def with_output(self, directory: Path) -> RunConfig:
        return replace(self, outputs=replace(self.outputs, directory=directory))

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["bathymetry"]["table"] = str(self.bathymetry.table) if self.bathymetry.table else None
        data["outputs"]["directory"] = str(self.outputs.directory)
        return data


def _block(cls: type, data: Mapping[str, Any] | None, defaults: Any, name: str) -> dict[str, Any]:
    """Merge `data` over the dataclass `defaults`, refusing unknown keys."""
    known = {f.name for f in fields(cls)}
    values = {key: getattr(defaults, key) for key in known}
    if data is None:
        return values
    if not isinstance(data, dict):
        errmsg = f"Configuration block {name!r} must be a table/object"
        raise ValueError(errmsg)
    unknown = sorted(set(data) - known)
    if unknown:
        errmsg = f"Unknown keys in configuration block {name!r}: {unknown}"
        raise ValueError(errmsg)
    values.update(data)
    return values


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, int | float) and math.isfinite(value) and value > 0):
        errmsg = f"{name} must be a positive number, got {value!r}"
        raise ValueError(errmsg)


def run_config_from_dict(data: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Build a RunConfig; missing blocks and keys take the demo values, file paths resolve against base_dir."""
    base = RunConfig()
    channel_values = _block(ChannelParams, data.get("channel"), base.channel, "channel")
    channel = ChannelParams(**{key: float(value) for key, value in channel_values.items()})
    wave_values = _block(WaveBlock, data.get("wave"), base.wave, "wave")
    wave = WaveBlock(int(wave_values["kappa"]), int(wave_values["m_tilde"]), float(wave_values["A"]))

    bathy_values = _block(BathymetrySource, data.get("bathymetry"), base.bathymetry, "bathymetry")
    table = bathy_values["table"]
    if table is not None:
        table = Path(table)
        if not table.is_absolute() and base_dir is not None:
            table = base_dir / table
        if not table.is_file():
            errmsg = f"Bathymetry table {table} does not exist"
            raise ValueError(errmsg)
    bathymetry = BathymetrySource(
        kind=bathy_values["kind"],
        amplitude=float(bathy_values["amplitude"]),
        nu=None if bathy_values["nu"] is None else float(bathy_values["nu"]),
        modes=tuple(int(mode) for mode in bathy_values["modes"]),
        table=table,
    )

    run_values = _block(RunBlock, data.get("run"), base.run, "run")
    run_values["probe_horizons"] = tuple(float(v) for v in run_values["probe_horizons"])
    run_values["mu_sweep"] = tuple(float(v) for v in run_values["mu_sweep"])
    run = RunBlock(**run_values)
    for name in ("tol_case", "tol_tail", "h", "T"):
        _positive(f"run.{name}", getattr(run, name))
    for horizon in run.probe_horizons:
        _positive("run.probe_horizons", horizon)
    for mu in run.mu_sweep:
        _positive("run.mu_sweep", mu)
    if run.J_max < 0 or run.grid_size < 16:  # noqa: PLR2004
        errmsg = f"run.J_max must be >= 0 and run.grid_size >= 16, got {run.J_max}, {run.grid_size}"
        raise ValueError(errmsg)

    outputs_values = _block(OutputsBlock, data.get("outputs"), base.outputs, "outputs")
    outputs = OutputsBlock(Path(outputs_values["directory"]), check_formats(outputs_values["formats"]))
    return RunConfig(channel, wave, bathymetry, run, outputs)


def load_run_config(path: Path | None) -> RunConfig:
    """Read the run blocks of a config file; no file means the demo run."""
    if path is None or not path.exists():
        if path is not None:
            logger.debug(f"config file {path} not found, using the demo run")
        return RunConfig()
    data = ConfigFile().load(path)
    config = run_config_from_dict({key: data[key] for key in BLOCKS if key in data}, path.parent)
    logger.debug(f"loaded run configuration from {path}")
    return config
