# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
bathyflow builds the streamfunction of a travelling wave in a shallow water channel whose bottom
decays away from the coast, order by order in the bathymetry amplitude, and checks it.

Commands
--------

solve   validate the channel and wave, build the bathymetry and solve the hierarchy of mode
        equations; writes layers.csv and convergence.json.
verify  re-check the written layers: reality and oddness symmetries, an independent solve of the
        mirrored modes, zero flux through the walls, the order of the PDE residual in mu, spatial
        decay and contraction of the layer sizes; writes verify.json.
nf      equilibria of the frozen particle Hamiltonian, its Birkhoff normal form at the elliptic
        point and the symplectic checks of the coordinate chain; writes nf.json, chain_trace.csv.
trace   frozen and perturbed particle trajectories, a Poincare section, the action stability probe
        at every configured horizon and the time decay of the perturbation; writes trace.json.
report  summary.json of every report found plus psi_lattice.csv for plotting.

Every command takes --config FILE (JSON or TOML with channel, wave, bathymetry, run and outputs
blocks, plus a bathyflow section for the out, jobs, loglevel and debug defaults), --out DIR and
--jobs N. verify also takes --mu-sweep "a,b,c". Without a config file the demo run is used.

The log level can also be set with the BATHYFLOW_LOG environment variable.

Exit codes: 0 success, 1 error, 2 usage, 3 validation failure, 4 hierarchy divergence,
5 verification failed.
"""

from __future__ import annotations

from importlib import metadata
from pathlib import Path

import tomlkit

try:
    __version__ = metadata.version(__package__)
except metadata.PackageNotFoundError:
    # development tree: src/bathyflow/__init__.py with pyproject.toml two levels up
    pyproject_path = Path(__file__).parent.parent.parent / "pyproject.toml"
    with pyproject_path.open() as fp:
        data = tomlkit.loads(fp.read()).value
        __version__ = data["tool"]["poetry"]["version"] + "dev"
