# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Streamline integration and the stability probe.

Every field maps (t, state) to the time derivative of a canonical pair; integration is the classical
fixed-step fourth-order Runge-Kutta scheme written from its Butcher tableau.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Protocol

import numpy as np
from loguru import logger

from bathyflow.errors import DomainError
from bathyflow.hamiltonian import FrozenHamiltonian

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

    from bathyflow.hamiltonian import HamiltonianModel
    from bathyflow.model import WaveParams
    from bathyflow.streamfield import StreamField

RK4_A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
)
RK4_B = np.array([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0])
RK4_C = np.array([0.0, 0.5, 0.5, 1.0])

BUDGET_CHECK_EVERY = 50
BUDGET_ABSOLUTE = 1e-15
BUDGET_RELATIVE = 1e-10
DECAY_WINDOW = (5.0, 15.0)


class Field(Protocol):
    """Right-hand side of a planar canonical system."""

    frozen: bool

    def __call__(self, t: float, state: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def conserved(self, t: float, state: NDArray[np.float64]) -> float: ...

    def in_domain(self, t: float, state: NDArray[np.float64]) -> bool: ...


class FrozenField:
    """The wave alone in the co-moving frame; state (p, q), conserved H(p, q)."""

    frozen = True

    def __init__(self, wave: WaveParams) -> None:
        self.hamiltonian = FrozenHamiltonian(wave)

    def __call__(self, t: float, state: NDArray[np.float64]) -> NDArray[np.float64]:
        h_p, h_q = self.hamiltonian.gradient(state[0], state[1])
        return np.array([-h_q, h_p], dtype=np.float64)

    def conserved(self, t: float, state: NDArray[np.float64]) -> float:
        return float(self.hamiltonian(state[0], state[1]))

    def in_domain(self, t: float, state: NDArray[np.float64]) -> bool:
        return True


class ChartField:
    """K(P, Q) = sigma [P - (sin P + lambda cos P) cos Q] around the elliptic point; state (P, Q)."""

    frozen = True

    def __init__(self, sigma: float, lambda_ell: float) -> None:
        self.sigma = sigma
        self.lambda_ell = lambda_ell

    def __call__(self, t: float, state: NDArray[np.float64]) -> NDArray[np.float64]:
        p, q = float(state[0]), float(state[1])
        k_p = self.sigma * (1.0 - (math.cos(p) - self.lambda_ell * math.sin(p)) * math.cos(q))
        k_q = self.sigma * (math.sin(p) + self.lambda_ell * math.cos(p)) * math.sin(q)
        return np.array([-k_q, k_p], dtype=np.float64)

    def conserved(self, t: float, state: NDArray[np.float64]) -> float:
        p, q = float(state[0]), float(state[1])
        return self.sigma * (p - (math.sin(p) + self.lambda_ell * math.cos(p)) * math.cos(q))

    def in_domain(self, t: float, state: NDArray[np.float64]) -> bool:
        return True


class SpectralField:
    """The reconstructed flow in the channel; state (x, y) with x' = -psi_y, y' = psi_x."""

    frozen = False

    def __init__(self, field: StreamField) -> None:
        self.field = field

    def __call__(self, t: float, state: NDArray[np.float64]) -> NDArray[np.float64]:
        x_dot, y_dot = velocity(self.field, state[0], state[1], t)
        return np.array([float(x_dot), float(y_dot)], dtype=np.float64)

    def conserved(self, t: float, state: NDArray[np.float64]) -> float:
        return math.nan

    def in_domain(self, t: float, state: NDArray[np.float64]) -> bool:
        return bool(state[0] >= 0)


class ActionAngleField:
    """Canonical equations of H0(I) + H1(I, phi, t); state (I, phi)."""

    def __init__(self, model: HamiltonianModel) -> None:
        self.model = model
        self.frozen = model.is_autonomous

    def __call__(self, t: float, state: NDArray[np.float64]) -> NDArray[np.float64]:
        action, angle = float(state[0]), float(state[1])
        d_action, d_angle = self.model.H1_gradient(action, angle, t)
        return np.array([-float(d_angle), float(self.model.H0_prime(action)) + float(d_action)], dtype=np.float64)

    def conserved(self, t: float, state: NDArray[np.float64]) -> float:
        return float(self.model.H0(float(state[0])))

    def in_domain(self, t: float, state: NDArray[np.float64]) -> bool:
        return bool(state[0] > 0)


def velocity(field: StreamField, x: ArrayLike, y: ArrayLike, t: ArrayLike) -> tuple[Any, Any]:
    """(x', y') = (-psi_y, psi_x) from the analytic gradient of the reconstruction."""
    grad = field.gradient(x, y, t)
    return -grad.psi_y, grad.psi_x


def rk4_step(field: Field, t: float, state: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    stages: list[NDArray[np.float64]] = []
    for i in range(len(RK4_B)):
        shift = sum((RK4_A[i, j] * stages[j] for j in range(i)), np.zeros_like(state))
        stages.append(field(t + RK4_C[i] * h, state + h * shift))
    return state + h * sum((b * k for b, k in zip(RK4_B, stages, strict=True)), np.zeros_like(state))


@dataclass(frozen=True)
class Trajectory:
    times: NDArray[np.float64]
    states: NDArray[np.float64]
    conserved: NDArray[np.float64]
    truncated: bool = False

    @property
    def drift(self) -> float:
        """|C(end) - C(start)| of the conserved quantity."""
        return float(abs(self.conserved[-1] - self.conserved[0]))

    def to_rows(self) -> list[list[float]]:
        return [
            [float(t), float(s[0]), float(s[1]), float(c)]
            for t, s, c in zip(self.times, self.states, self.conserved, strict=True)
        ]


def integrate(field: Field, start: ArrayLike, t0: float, t1: float, h: float) -> Trajectory:
    """Fixed-step RK4 from t0 to t1; stops early, flagged `truncated`, when the state leaves the domain."""
    if not h > 0:
        errmsg = f"Step size must be positive, got {h}"
        raise ValueError(errmsg)
    state = np.asarray(start, dtype=np.float64).copy()
    if not field.in_domain(t0, state):
        errmsg = f"Start point {state.tolist()} lies outside the domain"
        raise DomainError(errmsg)
    steps = max(1, math.ceil((t1 - t0) / h - 1e-9))
    step = (t1 - t0) / steps
    times = [t0]
    states = [state]
    conserved = [field.conserved(t0, state)]
    truncated = False
    t = t0
    for index in range(steps):
        try:
            candidate = rk4_step(field, t, state, step)
        except DomainError:
            truncated = True
            break
        t = t0 + (index + 1) * step
        if not field.in_domain(t, candidate) or not np.all(np.isfinite(candidate)):
            truncated = True
            break
        state = candidate
        times.append(t)
        states.append(state)
        conserved.append(field.conserved(t, state))
    if truncated:
        logger.warning(f"trajectory left the domain at t={t:.6g}; truncated after {len(times) - 1} steps")
    return Trajectory(np.array(times), np.array(states), np.array(conserved), truncated)


def integrate_many(
    field: Field, starts: Sequence[ArrayLike], t0: float, t1: float, h: float, jobs: int = 1
) -> list[Trajectory]:
    """Independent trajectories, optionally on a thread pool; the field is shared read-only."""
    if jobs <= 1:
        return [integrate(field, start, t0, t1, h) for start in starts]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda start: integrate(field, start, t0, t1, h), starts))


@dataclass(frozen=True)
class Linearization:
    jacobian: NDArray[np.float64]
    eigenvalues: NDArray[np.complex128]

    @property
    def kind(self) -> str:
        real = np.abs(self.eigenvalues.real)
        imag = np.abs(self.eigenvalues.imag)
        scale = max(float(np.max(np.abs(self.eigenvalues))), 1e-300)
        if np.all(real <= 1e-6 * scale) and np.any(imag > 0):
            return "elliptic"
        if np.all(imag <= 1e-6 * scale) and np.any(real > 0):
            return "hyperbolic"
        return "degenerate"


def linearize(field: Field, point: ArrayLike, step: float = 1e-6) -> Linearization:
    """Central-difference Jacobian of a time-frozen field and its eigenvalues."""
    if not field.frozen:
        errmsg = "linearize needs a time-frozen field"
        raise ValueError(errmsg)
    base = np.asarray(point, dtype=np.float64)
    jacobian = np.zeros((2, 2))
    for column in range(2):
        offset = np.zeros(2)
        offset[column] = step
        jacobian[:, column] = (field(0.0, base + offset) - field(0.0, base - offset)) / (2.0 * step)
    return Linearization(jacobian, np.linalg.eigvals(jacobian).astype(np.complex128))


def rotation_frequency(trajectory: Trajectory, center: ArrayLike = (0.0, 0.0)) -> float:
    """Signed angular rate of the orbit about `center`, fitted through its full-turn crossing times."""
    c = np.asarray(center, dtype=np.float64)
    angle = np.unwrap(np.arctan2(trajectory.states[:, 1] - c[1], trajectory.states[:, 0] - c[0]))
    direction = 1.0 if angle[-1] >= angle[0] else -1.0
    monotone = direction * angle
    first = math.ceil(monotone[0] / (2.0 * np.pi))
    last = math.floor(monotone[-1] / (2.0 * np.pi))
    if last - first < 1:
        errmsg = "rotation_frequency needs at least two full turns"
        raise ValueError(errmsg)
    levels = 2.0 * np.pi * np.arange(first, last + 1)
    crossings = np.interp(levels, np.maximum.accumulate(monotone), trajectory.times)
    slope = np.polyfit(crossings, levels, 1)[0]
    return float(direction * slope)


def poincare_section(trajectory: Trajectory, offset: float = 0.0, period: float = 2.0 * np.pi) -> NDArray[np.float64]:
    """Rows (t, first coordinate) where the second coordinate crosses offset mod period."""
    phase = np.floor((trajectory.states[:, 1] - offset) / period)
    rows = []
    for i in np.nonzero(np.diff(phase))[0]:
        lo, hi = trajectory.states[i, 1], trajectory.states[i + 1, 1]
        level = offset + period * max(phase[i], phase[i + 1])
        weight = (level - lo) / (hi - lo) if hi != lo else 0.0
        t = trajectory.times[i] + weight * (trajectory.times[i + 1] - trajectory.times[i])
        value = trajectory.states[i, 0] + weight * (trajectory.states[i + 1, 0] - trajectory.states[i, 0])
        rows.append([t, value])
    return np.array(rows, dtype=np.float64).reshape(len(rows), 2)


@dataclass(frozen=True)
class ProbeResult:
    I0: float
    horizon: float
    h: float
    t_entry: float
    t_stop: float
    excursion: float
    settled: bool
    steps: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "I0": self.I0,
            "T": self.horizon,
            "h": self.h,
            "t_entry": self.t_entry,
            "t_stop": self.t_stop,
            "excursion": self.excursion,
            "settled": self.settled,
            "steps": self.steps,
        }


def stability_probe(model: HamiltonianModel, I0: float, T: float, h: float) -> ProbeResult:  # noqa: N803
    """sup |I(t) - I0| over [t_entry, t_entry + T] for phi(t_entry) = 0.

    Integration stops before the horizon once the remaining perturbation cannot move the action
    by more than a negligible amount.
    """
    low, high = model.G_interval
    if not low < I0 < high:
        errmsg = f"I0={I0:.6g} must lie strictly inside the admissible actions ({low:.6g}, {high:.6g})"
        raise ValueError(errmsg)
    if not h > 0 or not T > 0:
        errmsg = f"Probe needs positive h and T, got h={h}, T={T}"
        raise ValueError(errmsg)
    field = ActionAngleField(model)
    t_entry = model.entry_time(I0)
    steps = max(1, math.ceil(T / h - 1e-9))
    step = T / steps
    state = np.array([I0, 0.0])
    excursion = 0.0
    settled = False
    t = t_entry
    done = 0
    for index in range(steps):
        if index % BUDGET_CHECK_EVERY == 0:
            budget = model.action_drift_budget(I0, t)
            if budget < BUDGET_ABSOLUTE or budget < BUDGET_RELATIVE * excursion:
                settled = True
                break
        state = rk4_step(field, t, state, step)
        t = t_entry + (index + 1) * step
        done = index + 1
        excursion = max(excursion, abs(float(state[0]) - I0))
    result = ProbeResult(I0, T, h, t_entry, t, excursion, settled, done)
    logger.info(f"stability probe: I0={I0:.6g}, excursion {excursion:.6g}, stopped at t={t:.6g}, settled={settled}")
    return result


@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    times: NDArray[np.float64]
    sup_values: NDArray[np.float64]

    def to_dict(self) -> dict[str, Any]:
        return {"rate": self.rate, "amplitude": self.amplitude}


def h1_sup(model: HamiltonianModel, I: float, t: float, samples: int = 64) -> float:  # noqa: N803
    phi = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    return float(np.max(np.abs(model.H1(np.full_like(phi, I), phi, t))))


def h1_decay(
    model: HamiltonianModel,
    I: float,  # noqa: N803
    window: tuple[float, float] = DECAY_WINDOW,
    points: int = 21,
) -> DecayFit:
    """Exponential fit of sup over phi of |H1(I, phi, t)| for t in t_entry + window."""
    t_entry = model.entry_time(I)
    times = t_entry + np.linspace(window[0], window[1], points)
    sups = np.array([h1_sup(model, I, float(t)) for t in times])
    if np.any(sups <= 0):
        return DecayFit(math.inf, 0.0, times, sups)
    slope, intercept = np.polyfit(times, np.log(sups), 1)
    return DecayFit(float(-slope), float(np.exp(intercept)), times, sups)
