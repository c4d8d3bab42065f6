# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
Exceptions raised by bathyflow.

Every exception derives from ValueError so the command line `main()` can keep the
simple `except ValueError` fallback while mapping the specific failures to their own exit codes.
"""

from __future__ import annotations

from typing import Any


class BathyflowError(ValueError):
    """Base class of all bathyflow errors."""


class ParameterError(BathyflowError):
    """A scalar input is unusable (zero dispersion denominator, non-finite value, ...)."""


class ValidationError(BathyflowError):
    """One or more named configuration checks failed."""

    def __init__(self, failures: list[str]) -> None:
        self.failures = list(failures)
        super().__init__(f"Validation failed: {', '.join(self.failures)}")


class DomainError(BathyflowError):
    """Evaluation requested outside the semi-infinite channel."""


class OutOfDomainError(DomainError):
    """A point mapped back through the canonical chain falls outside the channel (x < 0)."""


class SolverRefusedError(BathyflowError):
    """The mode solver or the bracket refused its input."""


class HierarchyDivergenceError(BathyflowError):
    """The order-by-order contraction ratio exceeded one twice in a row."""

    def __init__(self, message: str, report: dict[str, Any]) -> None:
        self.report = report
        super().__init__(message)


class SymmetryViolationError(BathyflowError):
    """A reconstructed field or layer violates the reality/oddness relations."""


class DegenerateEllipticityError(BathyflowError):
    """The ellipticity constant vanishes, so there is no normal form content."""


class ConditionViolatedError(BathyflowError):
    """|sigma / (kappa m A)| > 1: the frozen flow has no equilibria."""


class VerificationFailedError(BathyflowError):
    """At least one property checked by `verify` failed."""

    def __init__(self, report: dict[str, Any]) -> None:
        self.report = report
        failed = [name for name, entry in report.get("checks", {}).items() if not entry.get("passed", False)]
        super().__init__(f"Verification failed: {', '.join(failed) or 'unknown'}")
