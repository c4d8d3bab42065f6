# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
The canonical chain from the channel to action-angle variables around the elliptic point of the frozen wave.

Coordinates are written as canonical pairs (momentum, position) with q' = H_p and p' = -H_q:

    (y, x)  --Galilean-->  (p, q) = (y, x + sigma t / kappa)
            --shift----->  (p - p_e, q)
            --stretch--->  (p' / kappa, kappa q')
            --scale----->  (P, Q) = (kappa m p'', q'')          valence kappa m, K = kappa m H
            --Birkhoff-->  (P', Q'), K(P, Q) = NF(P'^2 + Q'^2) + (higher orders)
            --polar----->  (I, phi), P' = r cos(phi), Q' = r sin(phi), r = sqrt(2 I / c), c = -sigma lambda

The last factor has valence 1/c, so the Hamiltonian in (I, phi) is c times the one in (P', Q').
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

from bathyflow.errors import ConditionViolatedError, DegenerateEllipticityError, DomainError, OutOfDomainError
from bathyflow.normal_form import (
    NormalFormResult,
    apply_map,
    birkhoff,
    invert_map,
    validity_radius,
)
from bathyflow.poly2 import Poly2, cos_series, sin_series
from bathyflow.streamfield import StreamField

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike, NDArray

    from bathyflow.hierarchy import ExpansionState
    from bathyflow.model import WaveParams

NF_DEGREE = 6
G_SAFETY = 0.8
HESSIAN_TOLERANCE = 1e-12
ENTRY_MARGIN = 1.05
ENTRY_SAMPLES = 256


@dataclass(frozen=True)
class FrozenHamiltonian:
    """H(p, q) = (sigma / kappa) p - A sin(m p) cos(kappa q), the wave seen from the co-moving frame."""

    wave: WaveParams

    def __call__(self, p: ArrayLike, q: ArrayLike) -> NDArray[np.float64]:
        w = self.wave
        p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
        return w.sigma * p / w.kappa - w.A * np.sin(w.m_tilde * p) * np.cos(w.kappa * q)

    def gradient(self, p: ArrayLike, q: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(H_p, H_q)."""
        w = self.wave
        p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
        h_p = w.sigma / w.kappa - w.A * w.m_tilde * np.cos(w.m_tilde * p) * np.cos(w.kappa * q)
        h_q = w.A * w.kappa * np.sin(w.m_tilde * p) * np.sin(w.kappa * q)
        return h_p, h_q

    def hessian(self, p: float, q: float) -> NDArray[np.float64]:
        w = self.wave
        sine, cosine = math.sin(w.m_tilde * p), math.cos(w.m_tilde * p)
        h_pp = w.A * w.m_tilde**2 * sine * math.cos(w.kappa * q)
        h_qq = w.A * w.kappa**2 * sine * math.cos(w.kappa * q)
        h_pq = w.A * w.kappa * w.m_tilde * cosine * math.sin(w.kappa * q)
        return np.array([[h_pp, h_pq], [h_pq, h_qq]])


def frozen_hamiltonian(wave: WaveParams) -> FrozenHamiltonian:
    return FrozenHamiltonian(wave)


@dataclass(frozen=True)
class Equilibrium:
    p: float
    q: float
    kind: str
    hessian_det: float


def _classify(det: float, scale: float) -> str:
    if det > HESSIAN_TOLERANCE * scale:
        return "elliptic"
    if det < -HESSIAN_TOLERANCE * scale:
        return "hyperbolic"
    return "degenerate"


def equilibria(wave: WaveParams) -> tuple[Equilibrium, ...]:
    """The elliptic pair (+-arccos(c)/m, 0) and the hyperbolic pair (0, +-arccos(c)/kappa), c = sigma/(kappa m A)."""
    c = wave.condition
    if not abs(c) <= 1:
        errmsg = f"|sigma / (kappa m A)| = {abs(c):.6g} > 1: the frozen flow has no equilibria"
        raise ConditionViolatedError(errmsg)
    angle = math.acos(c)
    hamiltonian = FrozenHamiltonian(wave)
    scale = (wave.A * wave.kappa * wave.m_tilde) ** 2
    points = (
        (angle / wave.m_tilde, 0.0),
        (-angle / wave.m_tilde, 0.0),
        (0.0, angle / wave.kappa),
        (0.0, -angle / wave.kappa),
    )
    found = []
    for p, q in points:
        det = float(np.linalg.det(hamiltonian.hessian(p, q)))
        found.append(Equilibrium(p, q, _classify(det, scale), det))
    logger.debug(f"equilibria: {[(round(e.p, 6), round(e.q, 6), e.kind) for e in found]}")
    return tuple(found)


def expanded_hamiltonian(sigma: float, lambda_ell: float, degree: int) -> Poly2:
    """Taylor polynomial of sigma [P - (sin P + lambda cos P) cos Q] + sigma lambda at the origin."""
    sin_p = Poly2.univariate(sin_series(degree), 0, degree)
    cos_p = Poly2.univariate(cos_series(degree), 0, degree)
    cos_q = Poly2.univariate(cos_series(degree), 1, degree)
    p = Poly2.variable(0, degree)
    return (p - (sin_p + cos_p * lambda_ell) * cos_q) * sigma + sigma * lambda_ell


def chart_hamiltonian(sigma: float, lambda_ell: float) -> Callable[[Any, Any], NDArray[np.float64]]:
    """The closed form that `expanded_hamiltonian` truncates."""

    def evaluate(p: Any, q: Any) -> NDArray[np.float64]:
        p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
        return sigma * (p - (np.sin(p) + lambda_ell * np.cos(p)) * np.cos(q)) + sigma * lambda_ell

    return evaluate


def _action_scale(omega: float) -> float:
    scale = -omega
    if not scale > 0:
        errmsg = f"Action-angle variables need sigma * lambda < 0, got omega={omega:.6g}"
        raise ConditionViolatedError(errmsg)
    return scale


def to_action_angle(P: ArrayLike, Q: ArrayLike, omega: float) -> tuple[Any, Any]:  # noqa: N803
    """I = c (P^2 + Q^2) / 2, phi = atan2(Q, P) with c = -omega; phi = 0 at the origin."""
    scale = _action_scale(omega)
    P, Q = np.asarray(P, dtype=np.float64), np.asarray(Q, dtype=np.float64)  # noqa: N806
    return 0.5 * scale * (P * P + Q * Q), np.arctan2(Q, P)


def from_action_angle(I: ArrayLike, phi: ArrayLike, omega: float) -> tuple[Any, Any]:  # noqa: N803
    scale = _action_scale(omega)
    I, phi = np.asarray(I, dtype=np.float64), np.asarray(phi, dtype=np.float64)  # noqa: N806
    if np.any(I < 0):
        errmsg = "Actions must be non-negative"
        raise DomainError(errmsg)
    radius = np.sqrt(2.0 * I / scale)
    return radius * np.cos(phi), radius * np.sin(phi)


@dataclass(frozen=True)
class CanonicalChain:
    """Maps between channel points (x, y) at time t and action-angle variables (I, phi)."""

    wave: WaveParams
    p_elliptic: float
    normal_form: NormalFormResult

    @property
    def omega(self) -> float:
        return self.normal_form.omega

    @property
    def action_scale(self) -> float:
        return _action_scale(self.omega)

    @property
    def valence(self) -> float:
        return float(self.wave.kappa * self.wave.m_tilde)

    def galilean(self, x: Any, t: Any) -> Any:
        return np.asarray(x) + self.wave.sigma * np.asarray(t) / self.wave.kappa

    def to_chart(self, x: Any, y: Any, t: Any) -> tuple[Any, Any]:
        """(P, Q) of the channel point (x, y) at time t."""
        q = self.galilean(x, t)
        return self.wave.m_tilde * (np.asarray(y) - self.p_elliptic), self.wave.kappa * q

    def from_chart(self, P: Any, Q: Any, t: Any) -> tuple[Any, Any]:  # noqa: N803
        """(x, y) of the chart point (P, Q) at time t."""
        w = self.wave
        y = self.p_elliptic + np.asarray(P) / w.m_tilde
        x = np.asarray(Q) / w.kappa - w.sigma * np.asarray(t) / w.kappa
        return x, y

    def to_normal(self, P: float, Q: float) -> tuple[float, float]:  # noqa: N803
        return invert_map(self.normal_form, P, Q)

    def from_normal(self, P: Any, Q: Any) -> tuple[Any, Any]:  # noqa: N803
        return apply_map(self.normal_form.forward, P, Q)

    def to_action_angle(self, x: float, y: float, t: float) -> tuple[float, float]:
        P, Q = self.to_chart(x, y, t)  # noqa: N806
        P_new, Q_new = self.to_normal(float(P), float(Q))  # noqa: N806
        I, phi = to_action_angle(P_new, Q_new, self.omega)  # noqa: N806
        return float(I), float(phi)

    def from_action_angle(self, I: Any, phi: Any, t: Any) -> tuple[Any, Any]:  # noqa: N803
        P_new, Q_new = from_action_angle(I, phi, self.omega)  # noqa: N806
        P, Q = self.from_normal(P_new, Q_new)  # noqa: N806
        return self.from_chart(P, Q, t)

    @property
    def G_interval(self) -> tuple[float, float]:  # noqa: N802
        """Actions whose circles lie inside the validity disc, with a safety factor."""
        return 0.0, G_SAFETY * self.action_scale * self.normal_form.radius**2 / 2.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_elliptic": self.p_elliptic,
            "action_scale": self.action_scale,
            "valence": self.valence,
            "G_interval": list(self.G_interval),
        }


def normal_form_chain(
    wave: WaveParams, degree: int = NF_DEGREE, map_degree: int | None = None
) -> tuple[CanonicalChain, NormalFormResult]:
    """Shift to the elliptic point, rescale, expand to `degree` and normalize."""
    if degree < 4:  # noqa: PLR2004
        errmsg = f"Normal form degree must be at least 4, got {degree}"
        raise ValueError(errmsg)
    if wave.A == 0:
        errmsg = "The wave amplitude vanishes; there is no elliptic point to normalize at"
        raise DegenerateEllipticityError(errmsg)
    c = wave.condition
    if abs(c) > 1:
        errmsg = f"|sigma / (kappa m A)| = {abs(c):.6g} > 1: the frozen flow has no elliptic point"
        raise ConditionViolatedError(errmsg)
    lambda_ell = wave.lambda_ell
    if not lambda_ell > 0:
        errmsg = f"The ellipticity constant vanishes (sigma / (kappa m A) = {c:.6g})"
        raise DegenerateEllipticityError(errmsg)

    omega = wave.sigma * lambda_ell
    hamiltonian = expanded_hamiltonian(wave.sigma, lambda_ell, degree)
    result = birkhoff(hamiltonian, omega, lambda_ell, map_degree)
    result = result.with_radius(validity_radius(result, chart_hamiltonian(wave.sigma, lambda_ell)))
    p_elliptic = (math.copysign(math.acos(c), c) / wave.m_tilde) % (2.0 * math.pi)
    logger.info(f"normal form: omega={omega:.6g}, alpha={result.alpha}, radius {result.radius:g}")
    return CanonicalChain(wave, p_elliptic, result), result


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    """H(I, phi, t) = H0(I) + H1(I, phi, t); H1 is the streamfunction correction pulled back through the chain."""

    chain: CanonicalChain
    normal_form: NormalFormResult
    field: StreamField | None

    @property
    def is_autonomous(self) -> bool:
        return self._active_field is None

    @property
    def _active_field(self) -> StreamField | None:
        if self.field is None or self.field.is_zero:
            return None
        return self.field

    @property
    def G_interval(self) -> tuple[float, float]:  # noqa: N802
        return self.chain.G_interval

    @property
    def _scale(self) -> float:
        return self.chain.action_scale * self.chain.valence

    def _rho(self, I: Any) -> Any:  # noqa: N803
        return 2.0 * np.asarray(I) / self.chain.action_scale

    def H0(self, I: Any) -> Any:  # noqa: N802, N803
        """omega I + c sum alpha_k (2 I / c)^(k+1)."""
        return self.chain.action_scale * self.normal_form.radial(self._rho(I))

    def H0_prime(self, I: Any) -> Any:  # noqa: N802, N803
        return self.normal_form.frequency(self._rho(I))

    def _channel_point(self, I: Any, phi: Any, t: Any) -> tuple[Any, Any]:  # noqa: N803
        x, y = self.chain.from_action_angle(I, phi, t)
        if np.any(np.asarray(x) < 0):
            errmsg = f"(I, phi) maps outside the channel at t={np.min(t):.6g}"
            raise OutOfDomainError(errmsg)
        return x, y

    def H1(self, I: Any, phi: Any, t: Any) -> NDArray[np.float64]:  # noqa: N802, N803
        x, y = self._channel_point(I, phi, t)
        field = self._active_field
        if field is None:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return -self._scale * field(x, y, t, include_wave=False)

    def H1_gradient(self, I: Any, phi: Any, t: Any) -> tuple[Any, Any]:  # noqa: N802, N803
        """(dH1/dI, dH1/dphi) by the chain rule through the polar, Birkhoff and chart factors."""
        I, phi = np.asarray(I, dtype=np.float64), np.asarray(phi, dtype=np.float64)  # noqa: N806
        if np.any(I <= 0):
            errmsg = "The action gradient of H1 needs I > 0"
            raise DomainError(errmsg)
        x, y = self._channel_point(I, phi, t)
        field = self._active_field
        if field is None:
            zero = np.zeros(np.broadcast(x, y).shape)
            return zero, zero
        scale = self.chain.action_scale
        radius = np.sqrt(2.0 * I / scale)
        cosine, sine = np.cos(phi), np.sin(phi)
        p_new, q_new = radius * cosine, radius * sine
        jac = self.normal_form.forward_jacobian(p_new, q_new)
        d_i = (cosine / (scale * radius), sine / (scale * radius))
        d_phi = (-q_new, p_new)

        def pushed(d: tuple[Any, Any]) -> tuple[Any, Any]:
            return jac[..., 0, 0] * d[0] + jac[..., 0, 1] * d[1], jac[..., 1, 0] * d[0] + jac[..., 1, 1] * d[1]

        grad = field.gradient(x, y, t, include_wave=False)
        w = self.chain.wave
        dp_i, dq_i = pushed(d_i)
        dp_phi, dq_phi = pushed(d_phi)
        h1_i = -self._scale * (grad.psi_y * dp_i / w.m_tilde + grad.psi_x * dq_i / w.kappa)
        h1_phi = -self._scale * (grad.psi_y * dp_phi / w.m_tilde + grad.psi_x * dq_phi / w.kappa)
        return h1_i, h1_phi

    def q_min(self, I: float) -> float:  # noqa: N803
        """Smallest chart Q over the circle of action I."""
        phi = np.linspace(0.0, 2.0 * np.pi, ENTRY_SAMPLES, endpoint=False)
        p_new, q_new = from_action_angle(np.full_like(phi, I), phi, self.chain.omega)
        return float(np.min(self.chain.from_normal(p_new, q_new)[1]))

    def entry_time(self, I: float) -> float:  # noqa: N803
        """First time at which the whole circle of action I lies in the channel (x >= 0)."""
        sigma = self.chain.wave.sigma
        if not sigma < 0:
            errmsg = f"The co-moving frame drifts out of the channel for sigma={sigma:.6g} >= 0"
            raise ConditionViolatedError(errmsg)
        return max(0.0, -self.q_min(I) / abs(sigma)) * ENTRY_MARGIN

    def x_min(self, I: float, t: float) -> float:  # noqa: N803
        w = self.chain.wave
        return (self.q_min(I) + abs(w.sigma) * t) / w.kappa

    def action_drift_budget(self, I: float, t: float) -> float:  # noqa: N803
        """Upper bound of the action change still possible after time t."""
        field = self._active_field
        if field is None:
            return 0.0
        w = self.chain.wave
        rate = field.slowest_rate * abs(w.sigma) / w.kappa
        if not math.isfinite(rate) or rate <= 0:
            return math.inf
        radius = math.sqrt(2.0 * I / self.chain.action_scale)
        return self._scale * field.gradient_envelope(self.x_min(I, t)) * 2.0 * radius / rate


def assemble_model(chain: CanonicalChain, nf: NormalFormResult, state: ExpansionState | None) -> HamiltonianModel:
    """H0 from the normal form, H1 from the streamfunction correction of `state` (none: autonomous model)."""
    field = None
    if state is not None and state.J > 0 and state.channel.mu > 0:
        field = StreamField(state)
        if field.is_zero:
            field = None
    logger.debug(f"hamiltonian model: autonomous={field is None}, G={chain.G_interval}")
    return HamiltonianModel(chain, nf, field)


def _fd_det(
    func: Callable[[Any, Any], tuple[Any, Any]], a: NDArray[np.float64], b: NDArray[np.float64], step: float
) -> NDArray[np.float64]:
    plus_a, minus_a = func(a + step, b), func(a - step, b)
    plus_b, minus_b = func(a, b + step), func(a, b - step)
    d00 = (np.asarray(plus_a[0]) - np.asarray(minus_a[0])) / (2 * step)
    d10 = (np.asarray(plus_a[1]) - np.asarray(minus_a[1])) / (2 * step)
    d01 = (np.asarray(plus_b[0]) - np.asarray(minus_b[0])) / (2 * step)
    d11 = (np.asarray(plus_b[1]) - np.asarray(minus_b[1])) / (2 * step)
    return d00 * d11 - d01 * d10


def symplectic_check(
    chain: CanonicalChain,
    I: ArrayLike,  # noqa: N803
    phi: ArrayLike,
    t: float = 0.0,
    step: float = 1e-6,
) -> dict[str, float]:
    """max |det J - 1| of every factor (times its valence) and of the composition, at the sampled (I, phi)."""
    I, phi = np.asarray(I, dtype=np.float64), np.asarray(phi, dtype=np.float64)  # noqa: N806
    w = chain.wave
    scale = chain.action_scale
    p_new, q_new = from_action_angle(I, phi, chain.omega)
    p_chart, q_chart = chain.from_normal(p_new, q_new)
    p_scaled = p_chart / chain.valence
    p_stretched, q_stretched = w.kappa * p_scaled, q_chart / w.kappa
    p_shifted = p_stretched + chain.p_elliptic

    def polar(a: Any, b: Any) -> tuple[Any, Any]:
        return from_action_angle(a, b, chain.omega)

    def composed(a: Any, b: Any) -> tuple[Any, Any]:
        x, y = chain.from_action_angle(a, b, t)
        return y, x

    factors: dict[str, tuple[Callable[[Any, Any], tuple[Any, Any]], Any, Any, float]] = {
        "polar": (polar, I, phi, scale),
        "birkhoff": (chain.from_normal, p_new, q_new, 1.0),
        "scale": (lambda a, b: (a / chain.valence, b), p_chart, q_chart, chain.valence),
        "stretch": (lambda a, b: (w.kappa * a, b / w.kappa), p_scaled, q_chart, 1.0),
        "shift": (lambda a, b: (a + chain.p_elliptic, b), p_stretched, q_stretched, 1.0),
        "galilean": (lambda a, b: (a, b - w.sigma * t / w.kappa), p_shifted, q_stretched, 1.0),
        "composition": (composed, I, phi, scale * chain.valence),
    }
    report = {}
    for name, (func, a, b, valence) in factors.items():
        det = _fd_det(func, a, b, step) * valence
        report[name] = float(np.max(np.abs(det - 1.0)))
    logger.debug(f"symplectic check: {report}")
    return report


def trace_chain(
    chain: CanonicalChain,
    I: ArrayLike,  # noqa: N803
    phi: ArrayLike,
    t: float = 0.0,
) -> list[dict[str, float]]:
    """(I, phi) -> (x, y) -> (I, phi) round trips with their errors."""
    rows = []
    for action, angle in zip(np.ravel(I), np.ravel(phi), strict=True):
        x, y = chain.from_action_angle(float(action), float(angle), t)
        back_i, back_phi = chain.to_action_angle(float(x), float(y), t)
        x2, y2 = chain.from_action_angle(back_i, back_phi, t)
        rows.append(
            {
                "I": float(action),
                "phi": float(angle),
                "x": float(x),
                "y": float(y),
                "I_back": back_i,
                "phi_back": back_phi,
                "error": float(math.hypot(float(x2) - float(x), float(y2) - float(y))),
            }
        )
    return rows
