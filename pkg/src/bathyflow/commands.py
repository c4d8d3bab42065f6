# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
The solve, verify, nf, trace and report pipelines.

Each command reads a RunConfig, writes its artifacts below `config.outputs.directory` and returns
the report it wrote.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from bathyflow import artifacts
from bathyflow.bathymetry import build_bathymetry
from bathyflow.dynamics import (
    ActionAngleField,
    ChartField,
    FrozenField,
    h1_decay,
    integrate,
    linearize,
    poincare_section,
    rotation_frequency,
    stability_probe,
)
from bathyflow.errors import HierarchyDivergenceError, VerificationFailedError
from bathyflow.hamiltonian import (
    assemble_model,
    equilibria,
    normal_form_chain,
    symplectic_check,
    trace_chain,
)
from bathyflow.hierarchy import bracket_values, cross_check_layer, pde_residual, run_hierarchy, state_from_layers
from bathyflow.mode_ode import OdeSolution, bound_certificate, classify
from bathyflow.sampled import SampledCoefficient, make_grid
from bathyflow.streamfield import StreamField, boundary_flux

if TYPE_CHECKING:
    from pathlib import Path

    from numpy.typing import NDArray

    from bathyflow.bathymetry import BathymetrySpec
    from bathyflow.hierarchy import ExpansionState
    from bathyflow.normal_form import NormalFormResult
    from bathyflow.run_config import RunConfig

SYMMETRY_TOLERANCE = 1e-12
CROSS_CHECK_TOLERANCE = 1e-10
BOUNDARY_TOLERANCE = 1e-10
EXPONENT_TOLERANCE = 0.3
DECAY_SLACK = 0.05
CONTRACTION_FACTOR = 0.9
SWEEP_ORDER = 2
SATURATION_TOLERANCE = 0.05
H1_DECAY_FRACTION = 0.8
FREQUENCY_TURNS = 4
LATTICE_POINTS = (201, 65)


def _bathymetry(config: RunConfig, grid: NDArray[np.float64] | None = None) -> BathymetrySpec:
    channel = config.channel
    if grid is None:
        grid = make_grid(channel.nu, config.run.grid_size, config.run.x_max)
    return build_bathymetry(config.bathymetry, grid, channel.nu)


def solve_state(
    config: RunConfig,
    jobs: int = 1,
    J_max: int | None = None,  # noqa: N803
    enforce_threshold: bool = True,
    stop_tol: float | None = None,
    cross_check: bool = True,
) -> ExpansionState:
    """validate -> build_bathymetry -> run_hierarchy for `config`."""
    run = config.run
    options: dict[str, Any] = {} if stop_tol is None else {"stop_tol": stop_tol}
    return run_hierarchy(
        config.channel,
        config.wave_params,
        _bathymetry(config),
        run.J_max if J_max is None else J_max,
        run.M_max,
        run.tol_case,
        run.tol_tail,
        enforce_threshold=enforce_threshold,
        jobs=jobs,
        cross_check=cross_check,
        **options,
    )


def load_state(config: RunConfig) -> ExpansionState:
    """Rebuild the solved state from the layer dump and convergence report of a previous `solve`."""
    out = config.outputs.directory
    stored = artifacts.read_json(out / artifacts.CONVERGENCE_FILE)
    current = artifacts.to_plain(config.to_dict())
    for block in ("channel", "wave", "bathymetry"):
        if stored.get("config", {}).get(block) != current[block]:
            errmsg = f"{out / artifacts.CONVERGENCE_FILE} was produced by a different {block} configuration"
            raise ValueError(errmsg)
    layers = artifacts.read_layers(out / artifacts.LAYERS_FILE, int(stored["convergence"]["J"]) + 1)
    grid = next((coefficient.grid for layer in layers for coefficient in layer.values()), None)
    bathymetry = _bathymetry(config, grid)
    return state_from_layers(config.channel, config.wave_params, bathymetry, layers, config.run.tol_case)


def _state_for(config: RunConfig, jobs: int) -> ExpansionState:
    out = config.outputs.directory
    if (out / artifacts.LAYERS_FILE).is_file() and (out / artifacts.CONVERGENCE_FILE).is_file():
        return load_state(config)
    logger.info(f"no solve artifacts in {out}; solving the hierarchy")
    return solve_state(config, jobs)


def cmd_solve(config: RunConfig, jobs: int = 1) -> dict[str, Any]:
    """Solve the hierarchy and write the layer dump and the convergence report.

    A failed validation raises before anything is written; a divergent hierarchy still leaves its report.
    """
    out = config.outputs.directory
    try:
        state = solve_state(config, jobs)
    except HierarchyDivergenceError as ex:
        artifacts.write_json(
            out / artifacts.CONVERGENCE_FILE, {"config": config.to_dict(), "diverged": True, "convergence": ex.report}
        )
        raise
    report = {
        "config": config.to_dict(),
        "diverged": False,
        "validation": state.validation.to_dict(),
        "convergence": state.report(),
    }
    artifacts.write_layers(out / artifacts.LAYERS_FILE, state)
    artifacts.write_json(out / artifacts.CONVERGENCE_FILE, report)
    logger.info(f"solve: J={state.J}, eps={[f'{eps:.3g}' for eps in state.eps]}")
    return report


def _check(value: float, limit: float, passed: bool | None = None) -> dict[str, Any]:
    return {"value": value, "limit": limit, "passed": bool(value <= limit if passed is None else passed)}


def residual_sweep(config: RunConfig, order: int, jobs: int = 1) -> dict[str, Any]:
    """PDE residual of the order-`order` truncation at every mu of the sweep and its fitted power of mu."""
    mus = sorted(config.run.mu_sweep, reverse=True)
    expected = order + 1
    if _bathymetry(config).is_flat:
        return {"mu": mus, "residual": [], "expected": expected, "exponent": None, "passed": True, "trivial": True}
    residuals = []
    for mu in mus:
        state = solve_state(config.with_mu(mu), jobs, order, enforce_threshold=False, stop_tol=0.0, cross_check=False)
        residuals.append(pde_residual(state, min(order, state.J)))
        logger.debug(f"mu sweep: mu={mu:.6g}, residual {residuals[-1]:.6g}")
    sweep: dict[str, Any] = {"mu": mus, "residual": residuals, "expected": expected, "limit": EXPONENT_TOLERANCE}
    if len(mus) < 2 or any(residual <= 0 for residual in residuals):  # noqa: PLR2004
        sweep.update({"exponent": None, "passed": False, "trivial": False})
    else:
        exponent = float(np.polyfit(np.log(mus), np.log(residuals), 1)[0])
        passed = abs(exponent - expected) <= EXPONENT_TOLERANCE
        sweep.update({"exponent": exponent, "passed": passed, "trivial": False})
    return sweep


def bound_certificates(state: ExpansionState, tol_case: float) -> list[dict[str, Any]]:
    """The decay bound certificate of every stored (m > 0, kappa) mode, with its forcing majorant."""
    channel, wave = state.channel, state.wave
    kappa = wave.kappa
    grid = state.grid
    found = []
    for order in range(1, state.J + 1):
        if channel.mu == 0:
            break
        brackets = bracket_values(state.layers[order - 1].row(kappa), state.bathymetry.coefficients)
        scale = channel.mu / wave.sigma_of(kappa)
        for (m, n), coefficient in sorted(state.layers[order].coefficients.items()):
            if m <= 0 or n != kappa:
                continue
            forcing = brackets.get(m)
            if forcing is None or np.ndim(forcing) == 0:
                continue
            M = float(np.max(np.abs(scale * forcing) * np.exp(channel.nu * grid)))  # noqa: N806
            coeffs = classify(channel.Fcal / (2.0 * wave.sigma_of(n)), channel.F + m**2, tol_case)
            zero = SampledCoefficient.zeros(grid)
            solution = OdeSolution(coefficient, zero, zero, 0j, 0j)
            certificate = bound_certificate(solution, coeffs, M, channel.nu, channel.rho, state.validation.bounds)
            found.append({"j": order, "m": m, "n": n, "M": M, **certificate.to_dict()})
    return found


def cmd_verify(config: RunConfig, jobs: int = 1) -> dict[str, Any]:
    """Check the solved layers: symmetry, an independent n -> -n solve, the wall condition, the residual
    order in mu, spatial decay and contraction. Bound certificates are reported but never fail the run.
    """
    state = load_state(config)
    nu = state.channel.nu
    symmetry = max((layer.symmetry_error() for layer in state.layers), default=0.0)
    cross = max(
        (cross_check_layer(state, order, config.run.tol_case, config.run.tol_tail) for order in range(1, state.J + 1)),
        default=0.0,
    )
    flux = boundary_flux(StreamField(state))

    rates = [
        coefficient.require_decay().rate for layer in state.layers[1:] for coefficient in layer.coefficients.values()
    ]
    slowest = min(rates, default=math.inf)
    eps = state.eps
    contraction = all(ratio < 1 for ratio in state.ratios) and all(
        eps[j] < eps[0] * CONTRACTION_FACTOR**j for j in range(1, len(eps))
    )

    checks = {
        "symmetry": _check(symmetry, SYMMETRY_TOLERANCE),
        "cross_check": _check(cross, CROSS_CHECK_TOLERANCE),
        "boundary_flux": _check(flux, BOUNDARY_TOLERANCE),
        "residual_order": residual_sweep(config, min(state.J, SWEEP_ORDER), jobs),
        "decay": {"value": slowest, "limit": 0.5 * nu - DECAY_SLACK, "passed": slowest >= 0.5 * nu - DECAY_SLACK},
        "contraction": {"ratios": state.ratios, "eps": eps, "factor": CONTRACTION_FACTOR, "passed": contraction},
    }
    certificates = bound_certificates(state, config.run.tol_case)
    report = {
        "passed": all(entry["passed"] for entry in checks.values()),
        "checks": checks,
        "diagnostics": {
            "pde_residual": pde_residual(state),
            "bound_certificates": certificates,
            "certificates_passed": all(entry["passed"] for entry in certificates),
        },
    }
    artifacts.write_json(config.outputs.directory / artifacts.VERIFY_FILE, report)
    if not report["passed"]:
        raise VerificationFailedError(artifacts.to_plain(report))
    logger.info("verify: every check passed")
    return report


def frequency_check(nf: NormalFormResult, config: RunConfig) -> list[dict[str, float]]:
    """Rotation rate of integrated chart orbits against the normal form frequency at their radius."""
    wave = config.wave_params
    field = ChartField(wave.sigma, nf.lambda_ell)
    period = 2.0 * math.pi / abs(nf.omega)
    rows = []
    for fraction in (0.25, 0.5):
        radius = fraction * nf.radius
        start = [float(value) for value in (nf.forward[0](radius, 0.0), nf.forward[1](radius, 0.0))]
        trajectory = integrate(field, start, 0.0, FREQUENCY_TURNS * period, config.run.h)
        measured = rotation_frequency(trajectory)
        predicted = float(nf.frequency(radius**2))
        rows.append(
            {
                "radius": radius,
                "measured": measured,
                "predicted": predicted,
                "relative_error": abs(measured - predicted) / abs(predicted),
            }
        )
    return rows


def _action_samples(high: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    actions, angles = np.meshgrid(high * np.linspace(0.1, 0.9, 5), np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False))
    return actions.ravel(), angles.ravel()


def cmd_nf(config: RunConfig, jobs: int = 1) -> dict[str, Any]:  # noqa: ARG001
    """Equilibria, the normal form, the symplectic factors of the chain and a chain trace."""
    wave = config.wave_params
    chain, nf = normal_form_chain(wave, config.run.nf_degree)
    points = equilibria(wave)
    actions, angles = _action_samples(chain.G_interval[1])
    rows = trace_chain(chain, actions, angles)
    report = {
        "sigma": wave.sigma,
        "sigma_lambda": wave.sigma * nf.lambda_ell,
        "normal_form": nf.to_dict(),
        "chain": chain.to_dict(),
        "equilibria": [{"p": e.p, "q": e.q, "kind": e.kind, "hessian_det": e.hessian_det} for e in points],
        "symplectic": symplectic_check(chain, actions, angles),
        "round_trip_error": max(row["error"] for row in rows),
        "frequency": frequency_check(nf, config),
    }
    out = config.outputs.directory
    artifacts.write_chain_trace(out / artifacts.CHAIN_TRACE_FILE, rows, config.outputs.formats)
    artifacts.write_json(out / artifacts.NF_FILE, report)
    logger.info(f"nf: omega={nf.omega:.6g}, alpha={[round(a, 6) for a in nf.alpha]}, radius {nf.radius:g}")
    return report


def cmd_trace(config: RunConfig, jobs: int = 1) -> dict[str, Any]:
    """Frozen and perturbed trajectories, a Poincare section, the stability probe at every horizon
    and the time decay of the perturbation."""
    run, wave = config.run, config.wave_params
    out, formats = config.outputs.directory, config.outputs.formats
    state = _state_for(config, jobs)
    chain, nf = normal_form_chain(wave, run.nf_degree)
    model = assemble_model(chain, nf, state)
    I0 = 0.5 * chain.G_interval[1]  # noqa: N806

    x, y = chain.from_action_angle(I0, 0.0, 0.0)
    frozen = FrozenField(wave)
    frozen_path = integrate(frozen, [float(y), float(x)], 0.0, run.T, run.h)
    artifacts.write_trajectory(out / artifacts.FROZEN_TRAJECTORY_FILE, frozen_path, ("p", "q"), formats)
    linear = linearize(frozen, [chain.p_elliptic, 0.0])

    t_entry = model.entry_time(I0)
    action_path = integrate(ActionAngleField(model), [I0, 0.0], t_entry, t_entry + run.T, run.h)
    artifacts.write_trajectory(out / artifacts.ACTION_TRAJECTORY_FILE, action_path, ("I", "phi"), formats)
    artifacts.write_poincare(out / artifacts.POINCARE_FILE, poincare_section(action_path), formats)

    def probe(horizon: float) -> dict[str, Any]:
        return stability_probe(model, I0, horizon, run.h).to_dict()

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            probes = list(executor.map(probe, run.probe_horizons))
    else:
        probes = [probe(horizon) for horizon in run.probe_horizons]
    excursions = [entry["excursion"] for entry in probes]
    spread = max(excursions) - min(excursions)
    saturated = spread <= SATURATION_TOLERANCE * max(excursions) or max(excursions) == 0.0

    decay: dict[str, Any] = {"autonomous": model.is_autonomous}
    if not model.is_autonomous:
        fit = h1_decay(model, I0)
        expected = state.channel.nu * abs(wave.sigma) / (2.0 * wave.kappa)
        decay.update({**fit.to_dict(), "expected": expected, "passed": fit.rate >= H1_DECAY_FRACTION * expected})

    report = {
        "I0": I0,
        "G_interval": list(chain.G_interval),
        "t_entry": t_entry,
        "frozen": {"drift": frozen_path.drift, "truncated": frozen_path.truncated},
        "linearization": {"kind": linear.kind, "eigenvalues": [[e.real, e.imag] for e in linear.eigenvalues]},
        "action": {"drift": action_path.drift, "truncated": action_path.truncated},
        "probes": probes,
        "saturated": saturated,
        "h1_decay": decay,
    }
    artifacts.write_json(out / artifacts.TRACE_FILE, report)
    logger.info(f"trace: I0={I0:.6g}, excursions {excursions}, saturated={saturated}")
    return report


def cmd_report(config: RunConfig, jobs: int = 1) -> dict[str, Any]:
    """A summary of every report found in the output directory plus the streamfunction at t = 0."""
    out = config.outputs.directory
    state = _state_for(config, jobs)
    summary: dict[str, Any] = {
        "validation": state.validation.to_dict(),
        "convergence": state.report(),
    }
    for name, filename in (
        ("verify", artifacts.VERIFY_FILE),
        ("nf", artifacts.NF_FILE),
        ("trace", artifacts.TRACE_FILE),
    ):
        path = out / filename
        summary[name] = artifacts.read_json(path) if path.is_file() else None

    x_points, y_points = LATTICE_POINTS
    x_end = min(float(state.grid[-1]), 20.0 / state.channel.nu)
    xs = np.linspace(0.0, x_end, x_points)
    ys = np.linspace(0.0, 2.0 * np.pi, y_points)
    artifacts.write_lattice(out / artifacts.LATTICE_FILE, StreamField(state), xs, ys, 0.0, config.outputs.formats)
    artifacts.write_json(out / artifacts.SUMMARY_FILE, summary)
    return summary


def with_mu_sweep(config: RunConfig, mus: tuple[float, ...]) -> RunConfig:
    return replace(config, run=replace(config.run, mu_sweep=mus))


def output_path(config: RunConfig, directory: Path | None) -> RunConfig:
    return config if directory is None else config.with_output(directory)
