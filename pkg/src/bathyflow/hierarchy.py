# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Order by order construction of the streamfunction over the perturbed bottom.

Layer j holds the coefficients b[j](m, n)(x) of  psi_j = sum b[j](m, n)(x) exp(i (m y + sigma(n) t)), n = +-kappa.
Layer 0 is the travelling wave. Layer j >= 1 solves, mode by mode,

    b'' - 2 i alpha b' - beta_m^2 b = mu [b[j-1](., n), g]_m / sigma(n)

with alpha = Fcal / (2 sigma(n)), beta_m^2 = F + m^2. Only m > 0, n = kappa is solved; the other three
quadrants are mirrored with b(-m, n) = -b(m, n) and b(m, -n) = -conj(b(m, n)).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from bathyflow.errors import HierarchyDivergenceError, SolverRefusedError
from bathyflow.mode_ode import TOL_TAIL, OdeSolution, classify, solve_mode
from bathyflow.model import TOL_CASE, ValidationReport, validate
from bathyflow.sampled import DecayEnvelope, SampledCoefficient

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    from numpy.typing import NDArray

    from bathyflow.bathymetry import BathymetrySpec
    from bathyflow.model import ChannelParams, WaveParams

STOP_TOLERANCE = 1e-14

Mode = tuple[int, int]


@dataclass(frozen=True)
class ModeSet:
    """{(m, n): 0 < |m| <= M_max, n = +-kappa}."""

    M_max: int
    kappa: int

    @property
    def modes(self) -> tuple[Mode, ...]:
        return tuple(
            (sign * m, n) for n in (self.kappa, -self.kappa) for m in range(1, self.M_max + 1) for sign in (1, -1)
        )

    def __contains__(self, mode: object) -> bool:
        if not isinstance(mode, tuple) or len(mode) != 2:  # noqa: PLR2004
            return False
        m, n = mode
        return 0 < abs(m) <= self.M_max and abs(n) == self.kappa

    @classmethod
    def for_run(cls, wave: WaveParams, bathymetry: BathymetrySpec, J_max: int) -> ModeSet:  # noqa: N803
        """m_tilde + J_max * support radius bounds the support of every layer up to J_max."""
        return cls(wave.m_tilde + J_max * bathymetry.support_radius, wave.kappa)


@dataclass(frozen=True, eq=False)
class SpectralLayer:
    """The order-j coefficients; modes absent from `coefficients` vanish identically."""

    order: int
    coefficients: Mapping[Mode, SampledCoefficient]
    eps: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def coefficient(self, m: int, n: int, grid: NDArray[np.float64]) -> SampledCoefficient:
        found = self.coefficients.get((m, n))
        return found if found is not None else SampledCoefficient.zeros(grid, f"b[{self.order}]({m},{n})")

    def row(self, n: int) -> dict[int, SampledCoefficient]:
        """The sequence m -> b(m, n)."""
        return {m: coefficient for (m, k), coefficient in self.coefficients.items() if k == n}

    @property
    def support(self) -> set[int]:
        return {m for (m, _) in self.coefficients}

    def symmetry_error(self) -> float:
        """max of |b(-m,n) + b(m,n)| and |b(m,n) - conj(b(-m,-n))|, values and derivatives."""
        worst = 0.0
        for (m, n), coefficient in self.coefficients.items():
            odd = self.coefficients.get((-m, n))
            real = self.coefficients.get((-m, -n))
            if odd is None or real is None:
                return math.inf
            pairs = [(coefficient.values, odd.values, real.values)]
            if coefficient.deriv_values is not None and odd.deriv_values is not None and real.deriv_values is not None:
                pairs.append((coefficient.deriv_values, odd.deriv_values, real.deriv_values))
            for own, oddv, realv in pairs:
                worst = max(worst, float(np.max(np.abs(own + oddv))), float(np.max(np.abs(own - np.conj(realv)))))
        return worst


def _quadrants(
    grid: NDArray[np.float64], order: int, kappa: int, half: Mapping[int, SampledCoefficient]
) -> dict[Mode, SampledCoefficient]:
    """Mirror the (m > 0, kappa) entries onto the other three quadrants."""
    out: dict[Mode, SampledCoefficient] = {}
    for m, b in sorted(half.items()):
        deriv = b.require_derivative()
        out[(m, kappa)] = b
        out[(-m, kappa)] = SampledCoefficient(grid, -b.values, -deriv, b.decay, f"b[{order}]({-m},{kappa})")
        out[(m, -kappa)] = SampledCoefficient(
            grid, -np.conj(b.values), -np.conj(deriv), b.decay, f"b[{order}]({m},{-kappa})"
        )
        out[(-m, -kappa)] = SampledCoefficient(
            grid, np.conj(b.values), np.conj(deriv), b.decay, f"b[{order}]({-m},{-kappa})"
        )
    return out


def layer_eps(coefficients: Mapping[Mode, SampledCoefficient], nu: float) -> float:
    """sup over modes and grid of max(|m| |b|, |b'|) exp(nu x / 2)."""
    return max(
        (coefficient.sup_weighted(0.5 * nu, weight=abs(m)) for (m, _), coefficient in coefficients.items()),
        default=0.0,
    )


def zeroth_layer(wave: WaveParams, grid: NDArray[np.float64]) -> SpectralLayer:
    """b(m, n) = A / (4i) sign(m) exp(i n x) on (+-m_tilde, +-kappa)."""
    if wave.A == 0:
        return SpectralLayer(0, {}, 0.0)
    values = wave.A / 4j * np.exp(1j * wave.kappa * grid)
    b = SampledCoefficient(
        grid,
        values,
        1j * wave.kappa * values,
        DecayEnvelope(abs(wave.A) / 4.0, 0.0),
        f"b[0]({wave.m_tilde},{wave.kappa})",
    )
    coefficients = _quadrants(grid, 0, wave.kappa, {wave.m_tilde: b})
    return SpectralLayer(0, coefficients, max(wave.m_tilde, wave.kappa) * abs(wave.A) / 4.0)


def _shared_grid(sequences: Iterable[Mapping[int, SampledCoefficient]]) -> NDArray[np.float64] | None:
    grid: NDArray[np.float64] | None = None
    for sequence in sequences:
        for coefficient in sequence.values():
            if grid is None:
                grid = coefficient.grid
            elif len(coefficient.grid) != len(grid) or not np.array_equal(coefficient.grid, grid):
                errmsg = f"Bracket operands live on different grids ({coefficient.label})"
                raise SolverRefusedError(errmsg)
    return grid


def bracket_values(
    f_seq: Mapping[int, SampledCoefficient], g_seq: Mapping[int, SampledCoefficient]
) -> dict[int, NDArray[np.complex128]]:
    """Samples of [f, g]_m = sum_l l (f_l g'_{m-l} - g_l f'_{m-l}) for every m the supports reach."""
    if _shared_grid((f_seq, g_seq)) is None:
        return {}
    f_deriv = {index: coefficient.require_derivative() for index, coefficient in f_seq.items()}
    g_deriv = {index: coefficient.require_derivative() for index, coefficient in g_seq.items()}

    out: dict[int, NDArray[np.complex128]] = {}

    def accumulate(key: int, term: NDArray[np.complex128]) -> None:
        out[key] = out[key] + term if key in out else term

    for index, f in f_seq.items():
        if index == 0:
            continue
        for other, slope in g_deriv.items():
            accumulate(index + other, index * f.values * slope)
    for index, g in g_seq.items():
        if index == 0:
            continue
        for other, slope in f_deriv.items():
            accumulate(index + other, -index * g.values * slope)
    return out


def bracket(
    f_seq: Mapping[int, SampledCoefficient], g_seq: Mapping[int, SampledCoefficient], m: int
) -> SampledCoefficient:
    """[f, g]_m as a sampled function (values only)."""
    grid = _shared_grid((f_seq, g_seq))
    if grid is None:
        errmsg = "The bracket of two empty sequences has no grid"
        raise SolverRefusedError(errmsg)
    values = bracket_values(f_seq, g_seq).get(m)
    if values is None or np.ndim(values) == 0:
        return SampledCoefficient.zeros(grid, f"[f,g]_{m}")
    return SampledCoefficient.from_samples(grid, values, label=f"[f,g]_{m}")


@dataclass(frozen=True)
class _ModeProblem:
    m: int
    n: int
    order: int
    rhs: NDArray[np.complex128] | None


def _solve(
    problem: _ModeProblem,
    grid: NDArray[np.float64],
    channel: ChannelParams,
    wave: WaveParams,
    tol_case: float,
    tol_tail: float,
) -> OdeSolution | None:
    if problem.rhs is None or not np.any(problem.rhs):
        return None
    label = f"b[{problem.order}]({problem.m},{problem.n})"
    R = SampledCoefficient.from_samples(grid, problem.rhs, label=f"R {label}")  # noqa: N806
    coeffs = classify(channel.Fcal / (2.0 * wave.sigma_of(problem.n)), channel.F + problem.m**2, tol_case)
    try:
        return solve_mode(coeffs, R, tol_tail, label)
    except SolverRefusedError as ex:
        errmsg = f"{ex} [m={problem.m}, n={problem.n}, j={problem.order}]"
        raise SolverRefusedError(errmsg) from ex


def _problems(
    prev: SpectralLayer,
    bathymetry: BathymetrySpec,
    channel: ChannelParams,
    wave: WaveParams,
    mode_set: ModeSet,
    n: int,
) -> list[_ModeProblem]:
    order = prev.order + 1
    brackets = bracket_values(prev.row(n), bathymetry.coefficients) if channel.mu != 0 else {}
    scale = channel.mu / wave.sigma_of(n)
    dropped = [m for m, values in brackets.items() if m > mode_set.M_max and np.any(values)]
    if dropped:
        logger.debug(f"layer {order}: modes {dropped} lie beyond M_max={mode_set.M_max} and are dropped")
    problems = []
    for m in range(1, mode_set.M_max + 1):
        values = brackets.get(m)
        rhs = None if values is None or np.ndim(values) == 0 else scale * values
        problems.append(_ModeProblem(m, n, order, rhs))
    return problems


def _run_all(problems: list[_ModeProblem], jobs: int, solve: Any) -> list[OdeSolution | None]:
    if jobs > 1 and len(problems) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(solve, problems))
    return [solve(problem) for problem in problems]


def next_layer(
    prev: SpectralLayer,
    bathymetry: BathymetrySpec,
    channel: ChannelParams,
    wave: WaveParams,
    mode_set: ModeSet,
    tol_case: float = TOL_CASE,
    tol_tail: float = TOL_TAIL,
    jobs: int = 1,
    cross_check: bool = True,
) -> SpectralLayer:
    """Solve the (m > 0, kappa) modes of order prev.order + 1, mirror them and cross-check the n = -kappa half."""
    grid = bathymetry.grid
    order = prev.order + 1

    def solve(problem: _ModeProblem) -> OdeSolution | None:
        return _solve(problem, grid, channel, wave, tol_case, tol_tail)

    problems = _problems(prev, bathymetry, channel, wave, mode_set, wave.kappa)
    solutions = _run_all(problems, jobs, solve)
    half = {problem.m: sol.B for problem, sol in zip(problems, solutions, strict=True) if sol is not None}
    coefficients = _quadrants(grid, order, wave.kappa, half)

    diagnostics: dict[str, Any] = {"solved_modes": sorted(half)}
    if cross_check:
        mirrored = _problems(prev, bathymetry, channel, wave, mode_set, -wave.kappa)
        direct = _run_all(mirrored, jobs, solve)
        worst = 0.0
        for problem, sol in zip(mirrored, direct, strict=True):
            expected = coefficients.get((problem.m, -wave.kappa))
            got = sol.B.values if sol is not None else np.zeros(len(grid))
            want = expected.values if expected is not None else np.zeros(len(grid))
            worst = max(worst, float(np.max(np.abs(got - want))))
        diagnostics["cross_check"] = worst
        logger.debug(f"layer {order}: independent n=-kappa solve differs by {worst:.3g}")

    layer = SpectralLayer(order, coefficients, layer_eps(coefficients, channel.nu), diagnostics)
    logger.debug(f"layer {order}: support {sorted(layer.support)}, eps {layer.eps:.6g}")
    return layer


@dataclass(frozen=True, eq=False)
class ExpansionState:
    """Layers 0..J of one run together with the data that produced them."""

    channel: ChannelParams
    wave: WaveParams
    bathymetry: BathymetrySpec
    mode_set: ModeSet
    layers: tuple[SpectralLayer, ...]
    validation: ValidationReport
    stopped_early: bool = False

    @property
    def grid(self) -> NDArray[np.float64]:
        return self.bathymetry.grid

    @property
    def J(self) -> int:  # noqa: N802
        return len(self.layers) - 1

    @property
    def eps(self) -> list[float]:
        return [layer.eps for layer in self.layers]

    @property
    def ratios(self) -> list[float]:
        eps = self.eps
        return [eps[j] / eps[j - 1] if eps[j - 1] > 0 else 0.0 for j in range(1, len(eps))]

    @property
    def L_mu(self) -> float:  # noqa: N802
        """Measured contraction: the largest ratio eps_j / eps_{j-1}."""
        return max(self.ratios, default=0.0)

    def a_priori_bound(self) -> float:
        """4 eps_0 L e^{-rho/4} / ((1 - e^{-rho/4})(1 - L)) with the certified L(mu)."""
        certified = self.validation.L_mu
        if not certified < 1:
            return math.inf
        decay = math.exp(-self.channel.rho / 4.0)
        return 4.0 * self.eps[0] * certified * decay / ((1.0 - decay) * (1.0 - certified))

    def report(self) -> dict[str, Any]:
        certified = self.validation.L_mu
        return {
            "J": self.J,
            "M_max": self.mode_set.M_max,
            "mu": self.channel.mu,
            "eps": self.eps,
            "ratios": self.ratios,
            "L_mu_measured": self.L_mu,
            "L_mu_certificate": certified,
            "eps_bound": [self.eps[0] * certified**j for j in range(len(self.layers))],
            "psi_bound": self.a_priori_bound(),
            "threshold": 0.5,
            "certified": certified <= 0.5,  # noqa: PLR2004
            "stopped_early": self.stopped_early,
            "cross_check": [layer.diagnostics.get("cross_check", 0.0) for layer in self.layers[1:]],
            "symmetry_error": max((layer.symmetry_error() for layer in self.layers), default=0.0),
        }


def run_hierarchy(
    channel: ChannelParams,
    wave: WaveParams,
    bathymetry: BathymetrySpec,
    J_max: int,  # noqa: N803
    M_max: int | None = None,  # noqa: N803
    tol_case: float = TOL_CASE,
    tol_tail: float = TOL_TAIL,
    stop_tol: float = STOP_TOLERANCE,
    enforce_threshold: bool = True,
    jobs: int = 1,
    cross_check: bool = True,
) -> ExpansionState:
    """Layers 0..J_max; stops once eps_j < stop_tol, aborts when the ratio exceeds one twice in a row."""
    if J_max < 0:
        errmsg = f"J_max must be >= 0, got {J_max}"
        raise ValueError(errmsg)
    mode_set = ModeSet(M_max, wave.kappa) if M_max is not None else ModeSet.for_run(wave, bathymetry, J_max)
    report = validate(channel, wave, bathymetry, mode_set.M_max, tol_case)
    if enforce_threshold:
        report.raise_for_failures()
    logger.info(f"hierarchy: L(mu) certificate {report.L_mu:.6g}, M_max={mode_set.M_max}, J_max={J_max}")

    layers = [zeroth_layer(wave, bathymetry.grid)]
    stopped = False
    for order in range(1, J_max + 1):
        layer = next_layer(layers[-1], bathymetry, channel, wave, mode_set, tol_case, tol_tail, jobs, cross_check)
        layers.append(layer)
        previous = layers[-2].eps
        ratio = layer.eps / previous if previous > 0 else 0.0
        logger.info(f"layer {order}: eps={layer.eps:.6g} ratio={ratio:.6g}")
        state = ExpansionState(channel, wave, bathymetry, mode_set, tuple(layers), report)
        ratios = state.ratios
        if len(ratios) >= 2 and ratios[-1] > 1 and ratios[-2] > 1:  # noqa: PLR2004
            errmsg = f"Hierarchy diverges: eps ratio above one at orders {order - 1} and {order}"
            raise HierarchyDivergenceError(errmsg, state.report())
        if layer.eps < stop_tol:
            stopped = order < J_max
            break
    return ExpansionState(channel, wave, bathymetry, mode_set, tuple(layers), report, stopped)


def _second_derivative(
    order: int,
    m: int,
    n: int,
    b: NDArray[np.complex128],
    db: NDArray[np.complex128],
    rhs: NDArray[np.complex128] | None,
    channel: ChannelParams,
    wave: WaveParams,
) -> NDArray[np.complex128]:
    if order == 0:
        return -(n**2) * b
    alpha = channel.Fcal / (2.0 * wave.sigma_of(n))
    forcing = rhs if rhs is not None else 0.0
    return 2j * alpha * db + (channel.F + m**2) * b + forcing


def pde_residual(
    state: ExpansionState,
    J: int | None = None,  # noqa: N803
    x_stride: int = 4,
    ys: NDArray[np.float64] | None = None,
    ts: NDArray[np.float64] | None = None,
) -> float:
    """sup of d/dt(Lap psi - F psi) + J(psi, mu g) + Fcal psi_x over grid nodes x a (y, t) lattice.

    The linear part uses each mode's b'' from its own equation; the Jacobian is formed in physical space.
    """
    order_max = state.J if J is None else J
    if not 0 <= order_max <= state.J:
        errmsg = f"Residual order {order_max} outside 0..{state.J}"
        raise ValueError(errmsg)
    channel, wave = state.channel, state.wave
    idx = np.arange(0, len(state.grid), x_stride)
    ys = np.linspace(0.0, 2.0 * np.pi, 17) if ys is None else np.asarray(ys, dtype=np.float64)
    ts = np.array([0.0, 0.37]) if ts is None else np.asarray(ts, dtype=np.float64)
    y_lattice, t_lattice = (axis.ravel() for axis in np.meshgrid(ys, ts, indexing="ij"))

    shape = (len(idx), len(y_lattice))
    linear = np.zeros(shape, dtype=np.complex128)
    psi_x = np.zeros(shape, dtype=np.complex128)
    psi_y = np.zeros(shape, dtype=np.complex128)
    for order in range(order_max + 1):
        layer = state.layers[order]
        forcing: dict[int, dict[int, NDArray[np.complex128]]] = {}
        if order > 0 and channel.mu != 0:
            prev = state.layers[order - 1]
            for n in (wave.kappa, -wave.kappa):
                scale = channel.mu / wave.sigma_of(n)
                brackets = bracket_values(prev.row(n), state.bathymetry.coefficients)
                forcing[n] = {m: scale * values for m, values in brackets.items()}
        for (m, n), coefficient in layer.coefficients.items():
            b = coefficient.values[idx]
            db = coefficient.require_derivative()[idx]
            rhs = forcing.get(n, {}).get(m)
            if rhs is not None and np.ndim(rhs) > 0:
                rhs = rhs[idx]
            d2b = _second_derivative(order, m, n, b, db, rhs, channel, wave)
            alpha = channel.Fcal / (2.0 * wave.sigma_of(n))
            mode_linear = 1j * wave.sigma_of(n) * (d2b - 2j * alpha * db - (channel.F + m**2) * b)
            phase = np.exp(1j * (m * y_lattice + wave.sigma_of(n) * t_lattice))
            linear += mode_linear[:, None] * phase[None, :]
            psi_x += db[:, None] * phase[None, :]
            psi_y += (1j * m * b)[:, None] * phase[None, :]

    g_x = np.zeros(shape, dtype=np.complex128)
    g_y = np.zeros(shape, dtype=np.complex128)
    for index, coefficient in state.bathymetry.coefficients.items():
        phase = np.exp(1j * index * y_lattice)
        g_x += coefficient.require_derivative()[idx][:, None] * phase[None, :]
        g_y += (1j * index * coefficient.values[idx])[:, None] * phase[None, :]

    residual = linear + channel.mu * (psi_x * g_y - psi_y * g_x)
    return float(np.max(np.abs(residual)))


def state_from_layers(
    channel: ChannelParams,
    wave: WaveParams,
    bathymetry: BathymetrySpec,
    layers: list[dict[Mode, SampledCoefficient]],
    tol_case: float = TOL_CASE,
) -> ExpansionState:
    """Rebuild an ExpansionState from stored coefficients (for example a layer dump)."""
    M_max = max((abs(m) for layer in layers for (m, _) in layer), default=wave.m_tilde)  # noqa: N806
    mode_set = ModeSet(max(M_max, wave.m_tilde), wave.kappa)
    built = []
    for order, coefficients in enumerate(layers):
        if order == 0:
            eps = max(wave.m_tilde, wave.kappa) * abs(wave.A) / 4.0 if coefficients else 0.0
        else:
            eps = layer_eps(coefficients, channel.nu)
        built.append(SpectralLayer(order, dict(coefficients), eps))
    report = validate(channel, wave, bathymetry, mode_set.M_max, tol_case)
    return ExpansionState(channel, wave, bathymetry, mode_set, tuple(built), report)


def cross_check_layer(
    state: ExpansionState, order: int, tol_case: float = TOL_CASE, tol_tail: float = TOL_TAIL
) -> float:
    """Solve the n = -kappa half of `order` from layer order-1 and compare with the stored mirror."""
    if not 1 <= order <= state.J:
        errmsg = f"Cross check needs 1 <= order <= {state.J}, got {order}"
        raise ValueError(errmsg)
    prev, layer = state.layers[order - 1], state.layers[order]
    grid, kappa = state.grid, state.wave.kappa
    worst = 0.0
    for problem in _problems(prev, state.bathymetry, state.channel, state.wave, state.mode_set, -kappa):
        sol = _solve(problem, grid, state.channel, state.wave, tol_case, tol_tail)
        got = sol.B.values if sol is not None else np.zeros(len(grid))
        worst = max(worst, float(np.max(np.abs(got - layer.coefficient(problem.m, -kappa, grid).values))))
    return worst
