# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Physical parameters of the channel, the travelling wave and their validation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any

from loguru import logger

from bathyflow.errors import ParameterError, ValidationError

if TYPE_CHECKING:
    from bathyflow.bathymetry import BathymetrySpec

TOL_CASE = 1e-9
"""|beta^2 - alpha^2| below this is treated as resonant."""

MAJORANT_LIMIT = 0.5


def dispersion(F: float, Fcal: float, kappa: float, m_tilde: float) -> float:  # noqa: N803
    """Wave speed making the travelling wave an exact solution over a flat bottom."""
    denominator = m_tilde**2 + kappa**2 + F
    if denominator == 0:
        errmsg = f"Dispersion relation has a zero denominator (m_tilde={m_tilde}, kappa={kappa}, F={F})"
        raise ParameterError(errmsg)
    if denominator < 0:
        errmsg = f"Dispersion relation needs m_tilde^2 + kappa^2 + F > 0, got {denominator}"
        raise ParameterError(errmsg)
    return kappa * Fcal / denominator


@dataclass(frozen=True)
class ChannelParams:
    """Scaling constants of the channel and the bathymetry decay data."""

    F: float
    Fcal: float
    d: float
    mu: float
    nu: float
    Mcal: float
    rho: float = 0.5

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                errmsg = f"Channel parameter {name} must be finite, got {value}"
                raise ParameterError(errmsg)
        if self.mu < 0:
            errmsg = f"Bathymetry amplitude mu must be >= 0, got {self.mu}"
            raise ParameterError(errmsg)

    def with_mu(self, mu: float) -> ChannelParams:
        return ChannelParams(self.F, self.Fcal, self.d, mu, self.nu, self.Mcal, self.rho)


@dataclass(frozen=True)
class WaveParams:
    """The travelling wave A sin(m y) cos(kappa x + sigma t)."""

    kappa: int
    m_tilde: int
    A: float
    sigma: float

    @classmethod
    def from_channel(cls, channel: ChannelParams, kappa: int, m_tilde: int, A: float) -> WaveParams:  # noqa: N803
        if kappa <= 0 or m_tilde <= 0:
            errmsg = f"Wave numbers must be positive integers, got kappa={kappa}, m_tilde={m_tilde}"
            raise ParameterError(errmsg)
        return cls(kappa, m_tilde, float(A), dispersion(channel.F, channel.Fcal, kappa, m_tilde))

    def sigma_of(self, n: int) -> float:
        """sigma(n) for n = +-kappa; the dispersion relation is odd in the wave number."""
        return self.sigma if n > 0 else -self.sigma

    @property
    def condition(self) -> float:
        """sigma / (kappa m_tilde A)."""
        if self.A == 0:
            return math.inf
        return self.sigma / (self.kappa * self.m_tilde * self.A)

    @property
    def lambda_ell(self) -> float:
        """Ellipticity constant sqrt((A kappa m_tilde / sigma)^2 - 1)."""
        c = self.condition
        if c == 0 or abs(c) > 1:
            return math.nan
        return math.sqrt(max(1.0 / (c * c) - 1.0, 0.0))


@dataclass(frozen=True)
class DeltaBounds:
    """Extreme widths |delta_m| of the mode operators over a range of m."""

    delta_minus: float
    m_star: int
    delta_plus: float


def delta_bounds(alpha: float, F: float, m_max: int, tol_case: float = TOL_CASE) -> DeltaBounds:  # noqa: N803
    """delta_minus = inf |delta_m| over non-resonant m, delta_plus = sup |delta_m| over oscillating m."""
    delta_minus = math.inf
    m_star = 0
    delta_plus = 0.0
    for m in range(m_max + 1):
        gap = F + m * m - alpha * alpha
        if abs(gap) < tol_case:
            continue
        width = math.sqrt(abs(gap))
        if width < delta_minus:
            delta_minus, m_star = width, m
        if gap < 0:
            delta_plus = max(delta_plus, width)
    return DeltaBounds(delta_minus, m_star, delta_plus)


def ode_constant(alpha: float, nu: float, bounds: DeltaBounds) -> float:
    """The mode solver's bound constant 32 (2 + |alpha|) exp(|alpha| + 2 nu + delta_plus) / (delta_minus nu^3)."""
    if not math.isfinite(bounds.delta_minus) or bounds.delta_minus == 0:
        return math.inf
    return (
        32.0
        * (2.0 + abs(alpha))
        * math.exp(abs(alpha) + 2.0 * nu + bounds.delta_plus)
        / (bounds.delta_minus * nu**3)
    )


def majorant_ratio(channel: ChannelParams, wave: WaveParams, bounds: DeltaBounds) -> float:
    """L(mu) = 32 mu M G (|m*| + 1) / (|sigma| rho^2)."""
    alpha = channel.Fcal / (2.0 * wave.sigma)
    constant = ode_constant(alpha, channel.nu, bounds)
    if constant == math.inf:
        return math.inf if channel.mu * channel.Mcal > 0 else 0.0
    return (
        32.0
        * channel.mu
        * channel.Mcal
        * constant
        * (abs(bounds.m_star) + 1)
        / (abs(wave.sigma) * channel.rho**2)
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """Named checks of a channel/wave configuration plus the majorant certificate."""

    checks: tuple[CheckResult, ...]
    L_mu: float
    G: float
    bounds: DeltaBounds
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def raise_for_failures(self) -> None:
        if not self.passed:
            raise ValidationError(self.failures)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": {check.name: {"passed": check.passed, "detail": check.detail} for check in self.checks},
            "L_mu": self.L_mu,
            "G": self.G,
            "delta_minus": self.bounds.delta_minus,
            "m_star": self.bounds.m_star,
            "delta_plus": self.bounds.delta_plus,
            **self.extra,
        }


def validate(
    channel: ChannelParams,
    wave: WaveParams,
    bathymetry: BathymetrySpec | None = None,
    m_max: int | None = None,
    tol_case: float = TOL_CASE,
) -> ValidationReport:
    """Run every named check; a failure never raises here, see ValidationReport.raise_for_failures."""
    checks: list[CheckResult] = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append(CheckResult(name, bool(passed), detail))
        if not passed:
            logger.debug(f"validation check {name!r} failed: {detail}")

    check("wave direction", channel.Fcal < 0, f"Fcal={channel.Fcal} must be negative")
    bound = wave.kappa * wave.m_tilde * wave.A
    check(
        "ellipticity",
        -wave.sigma <= bound * (1 + 1e-12) and bound > 0,
        f"-sigma={-wave.sigma} must not exceed kappa*m_tilde*A={bound}",
    )

    check("depth ordering", 0 < channel.mu < channel.d, f"need 0 < mu={channel.mu} < d={channel.d}")
    check("decay rate", channel.nu > 0, f"nu={channel.nu} must be positive")
    check("analyticity width", 0 < channel.rho <= 0.5, f"rho={channel.rho} must lie in (0, 1/2]")
    check("amplitude bound", channel.Mcal > 0 and wave.A != 0, f"need Mcal={channel.Mcal} > 0 and A={wave.A} != 0")

    extra: dict[str, Any] = {}
    alpha = channel.Fcal / (2.0 * wave.sigma) if wave.sigma != 0 else math.inf
    search = max(m_max or 0, wave.m_tilde + 8)
    bounds = delta_bounds(alpha, channel.F, search, tol_case) if math.isfinite(alpha) else DeltaBounds(0.0, 0, 0.0)
    constant = ode_constant(alpha, channel.nu, bounds) if channel.nu > 0 and math.isfinite(alpha) else math.inf
    ratio = majorant_ratio(channel, wave, bounds) if channel.nu > 0 and channel.rho > 0 else math.inf
    check("majorant threshold", ratio <= MAJORANT_LIMIT, f"L(mu)={ratio:.6g} must not exceed {MAJORANT_LIMIT}")

    if bathymetry is not None and channel.nu > 0:
        norm = bathymetry.weighted_norm(channel.rho, channel.nu)
        extra["bathymetry_norm"] = norm
        check("bathymetry bound", norm <= channel.Mcal * (1 + 1e-9), f"sup norm {norm:.6g} exceeds Mcal")

    report = ValidationReport(tuple(checks), ratio, constant, bounds, extra)
    logger.debug(f"validation: passed={report.passed}, L(mu)={ratio:.6g}, G={constant:.6g}")
    return report
