# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Files written and read back by the commands.

CSV tables carry 17 significant digits so identical runs give identical files. Diagnostic tables can
also be written as JSON documents of columns and rows.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from bathyflow.cli.config_file import ConfigFile
from bathyflow.sampled import SampledCoefficient

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from numpy.typing import NDArray

    from bathyflow.dynamics import Trajectory
    from bathyflow.hierarchy import ExpansionState, Mode
    from bathyflow.streamfield import StreamField

LAYERS_FILE = "layers.csv"
CONVERGENCE_FILE = "convergence.json"
VERIFY_FILE = "verify.json"
NF_FILE = "nf.json"
CHAIN_TRACE_FILE = "chain_trace.csv"
TRACE_FILE = "trace.json"
FROZEN_TRAJECTORY_FILE = "trajectory_frozen.csv"
ACTION_TRAJECTORY_FILE = "trajectory_action.csv"
POINCARE_FILE = "poincare.csv"
SUMMARY_FILE = "summary.json"
LATTICE_FILE = "psi_lattice.csv"

LAYER_COLUMNS = ("j", "m", "n", "x", "re_b", "im_b", "re_db", "im_db")
FORMAT = "%.17g"
TABLE_FORMATS = ("csv", "json")


def check_formats(formats: Sequence[str]) -> tuple[str, ...]:
    """The requested table formats, which must be a non-empty subset of TABLE_FORMATS."""
    chosen = tuple(dict.fromkeys(formats))
    unknown = sorted(set(chosen) - set(TABLE_FORMATS))
    if not chosen or unknown:
        errmsg = f"Table formats must be a non-empty subset of {list(TABLE_FORMATS)}, got {list(chosen)}"
        raise ValueError(errmsg)
    return chosen


def _write_table(
    path: Path, header: Sequence[str], table: NDArray[np.float64], formats: Sequence[str] = ("csv",)
) -> Path:
    """Write the table once per format, named after `path` with the format's suffix.

    Returns the file of the first format listed.
    """
    written = []
    for kind in check_formats(formats):
        target = path.with_suffix(f".{kind}")
        target.parent.mkdir(parents=True, exist_ok=True)
        if kind == "csv":
            np.savetxt(target, np.atleast_2d(table), delimiter=",", fmt=FORMAT, header=",".join(header), comments="")
        else:
            rows = np.asarray(table, dtype=np.float64).reshape(-1, len(header))
            ConfigFile().save(target, to_plain({"columns": list(header), "rows": rows}))
        logger.info(f"wrote {target}")
        written.append(target)
    return written[0]


def write_json(path: Path, data: Mapping[str, Any]) -> Path:
    ConfigFile().save(path, to_plain(data))
    logger.info(f"wrote {path}")
    return path


def read_json(path: Path) -> dict[str, Any]:
    return ConfigFile().load(path)


def to_plain(value: Any) -> Any:
    """numpy scalars, tuples and paths as JSON values; non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_plain(item) for item in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        number = float(value)
        return number if np.isfinite(number) else str(number)
    if isinstance(value, Path):
        return str(value)
    return value


def write_layers(path: Path, state: ExpansionState) -> Path:
    """One row per (order, mode, grid node); modes absent from a layer vanish identically."""
    blocks = []
    for layer in state.layers:
        for (m, n), coefficient in sorted(layer.coefficients.items()):
            deriv = coefficient.require_derivative()
            size = len(coefficient.grid)
            blocks.append(
                np.column_stack(
                    (
                        np.full(size, layer.order),
                        np.full(size, m),
                        np.full(size, n),
                        coefficient.grid,
                        coefficient.values.real,
                        coefficient.values.imag,
                        deriv.real,
                        deriv.imag,
                    )
                )
            )
    table = np.vstack(blocks) if blocks else np.empty((0, len(LAYER_COLUMNS)))
    return _write_table(path, LAYER_COLUMNS, table)


def read_layers(path: Path, orders: int) -> list[dict[Mode, SampledCoefficient]]:
    """Coefficients of orders 0..orders-1; decay envelopes are refitted from the samples."""
    layers: list[dict[Mode, SampledCoefficient]] = [{} for _ in range(orders)]
    if len(path.read_text(encoding="utf-8").splitlines()) < 2:  # noqa: PLR2004
        return layers
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if table.size and table.shape[1] != len(LAYER_COLUMNS):
        errmsg = f"{path}: expected columns {','.join(LAYER_COLUMNS)}"
        raise ValueError(errmsg)
    rows: dict[tuple[int, int, int], list[NDArray[np.float64]]] = defaultdict(list)
    for row in table:
        rows[(int(row[0]), int(row[1]), int(row[2]))].append(row)

    for (order, m, n), samples in sorted(rows.items()):
        if not 0 <= order < orders:
            errmsg = f"{path}: layer {order} outside 0..{orders - 1}"
            raise ValueError(errmsg)
        block = np.array(samples)
        layers[order][(m, n)] = SampledCoefficient.from_samples(
            block[:, 3],
            block[:, 4] + 1j * block[:, 5],
            block[:, 6] + 1j * block[:, 7],
            f"b[{order}]({m},{n})",
        )
    logger.debug(f"read {sum(len(layer) for layer in layers)} coefficients from {path}")
    return layers


def write_trajectory(
    path: Path, trajectory: Trajectory, names: tuple[str, str], formats: Sequence[str] = ("csv",)
) -> Path:
    table = np.column_stack((trajectory.times, trajectory.states, trajectory.conserved))
    return _write_table(path, ("t", *names, "conserved"), table, formats)


def write_poincare(path: Path, section: NDArray[np.float64], formats: Sequence[str] = ("csv",)) -> Path:
    return _write_table(path, ("t", "I"), section.reshape(-1, 2), formats)


def write_chain_trace(path: Path, rows: Sequence[Mapping[str, float]], formats: Sequence[str] = ("csv",)) -> Path:
    header = ("I", "phi", "x", "y", "I_back", "phi_back", "error")
    table = np.array([[row[key] for key in header] for row in rows], dtype=np.float64).reshape(-1, len(header))
    return _write_table(path, header, table, formats)


def write_lattice(
    path: Path,
    field: StreamField,
    xs: NDArray[np.float64],
    ys: NDArray[np.float64],
    t: float,
    formats: Sequence[str] = ("csv",),
) -> Path:
    """x, y, the correction psi - psi_0 and the full streamfunction psi at time t."""
    xx, yy = (axis.ravel() for axis in np.meshgrid(xs, ys, indexing="ij"))
    full = field(xx, yy, t)
    correction = field(xx, yy, t, include_wave=False)
    return _write_table(path, ("x", "y", "psi_tilde", "psi"), np.column_stack((xx, yy, correction, full)), formats)
