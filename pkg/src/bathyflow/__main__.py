# SPDX-FileCopyrightText: 2024 Roy Wright
#
# SPDX-License-Identifier: MIT

"""
The bathyflow command line: solve, verify, nf, trace and report a run configuration.

Exit codes: 0 success, 1 error, 2 usage, 3 validation failure, 4 hierarchy divergence, 5 verification failed.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

from loguru import logger

from bathyflow.cli.application_settings import ApplicationSettings
from bathyflow.commands import cmd_nf, cmd_report, cmd_solve, cmd_trace, cmd_verify, output_path, with_mu_sweep
from bathyflow.errors import HierarchyDivergenceError, ValidationError, VerificationFailedError
from bathyflow.run_config import BLOCKS, run_config_from_dict

if TYPE_CHECKING:
    import argparse
    from collections.abc import Sequence

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 3
EXIT_DIVERGENCE = 4
EXIT_VERIFICATION = 5

COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "nf": cmd_nf,
    "trace": cmd_trace,
    "report": cmd_report,
}


def _mu_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as ex:
        errmsg = f'--mu-sweep expects comma separated numbers, got "{text}"'
        raise ValueError(errmsg) from ex
    if not values or any(not value > 0 for value in values):
        errmsg = f'--mu-sweep needs positive values, got "{text}"'
        raise ValueError(errmsg)
    return values


# noinspection PyMethodMayBeStatic
class Settings(ApplicationSettings):
    """The bathyflow command line settings.

    Usage::

        with Settings(args) as settings:
            if settings.quick_exit:
                return 0
            COMMANDS[settings.command](settings.run_config, jobs=settings.jobs)
    """

    __project_name: str = "bathyflow"
    """The name of the project"""

    __project_package: str = "bathyflow"
    """The name of the package this settings belongs to."""

    __project_description: str = (
        "Perturbation expansion and verification of a travelling wave in a shallow water channel "
        "over decaying bathymetry, and the stability of its particle orbits."
    )

    def __init__(self, args: Sequence[str] | None = None) -> None:
        super().__init__(
            app_name=Settings.__project_name,
            app_package=Settings.__project_package,
            app_description=Settings.__project_description,
            config_section=Settings.__project_package,
            args=args,
        )
        self.add_persist_keys({"out", "jobs", "loglevel", "debug"})

    def add_arguments(self, parser: argparse.ArgumentParser, defaults: dict[str, Any]) -> None:
        # subparser defaults win over parser.set_defaults, so the persisted values are passed here
        def add_common_arguments(_parser: argparse.ArgumentParser) -> None:
            _parser.add_argument(
                "--out",
                dest="out",
                default=defaults.get("out"),
                type=Path,
                help="Directory for the artifacts (default: outputs.directory of the run configuration).",
            )
            _parser.add_argument(
                "--jobs",
                dest="jobs",
                default=defaults.get("jobs", 1),
                type=int,
                help="Worker threads for mode solves and trajectories.",
            )

        subparsers = parser.add_subparsers(dest="command")

        solve_parser = subparsers.add_parser("solve", description="Solve the hierarchy and write the layer dump.")
        add_common_arguments(solve_parser)

        verify_parser = subparsers.add_parser("verify", description="Check the layers written by solve.")
        verify_parser.add_argument(
            "--mu-sweep",
            dest="mu_sweep",
            default=None,
            type=str,
            help='Comma separated mu values for the residual order fit, ex: "1e-3,5e-4,2.5e-4".',
        )
        add_common_arguments(verify_parser)

        nf_parser = subparsers.add_parser("nf", description="Normal form of the frozen particle Hamiltonian.")
        add_common_arguments(nf_parser)

        trace_parser = subparsers.add_parser("trace", description="Trajectories and the stability probe.")
        add_common_arguments(trace_parser)

        report_parser = subparsers.add_parser("report", description="Summary report and streamfunction lattice.")
        add_common_arguments(report_parser)

    def validate_arguments(self, settings: argparse.Namespace, remaining_argv: list[str]) -> list[str]:
        errors: list[str] = []

        if remaining_argv:
            errors.append(f"The following arguments are unrecognized/unsupported: {remaining_argv}")

        if settings.command is None:
            errors.append(
                "A command argument (solve, verify, nf, trace, report) or an informational option "
                "(--help, --longhelp, --version) is required"
            )
            return errors

        if not isinstance(settings.jobs, int) or settings.jobs < 1:
            errors.append(f"--jobs must be an integer of at least 1, got {settings.jobs!r}")
        if settings.out is not None:
            settings.out = Path(settings.out)
        return errors


def _run_config(settings: argparse.Namespace) -> None:
    """Attach the RunConfig built from the config file blocks and the command line overrides."""
    data = settings.config_data or {}
    base_dir = settings.config_file.parent if settings.config_file is not None else None
    config = run_config_from_dict({key: data[key] for key in BLOCKS if key in data}, base_dir)
    config = output_path(config, settings.out)
    if getattr(settings, "mu_sweep", None):
        config = with_mu_sweep(config, _mu_list(settings.mu_sweep))
    settings.run_config = config


def main(args: list[str] | None = None) -> int:
    """The command line applications main function."""
    with Settings(args=args) as settings:
        # --version and --longhelp exit right after printing.
        if settings.quick_exit:
            return EXIT_OK

        try:
            _run_config(settings)
            COMMANDS[settings.command](settings.run_config, jobs=settings.jobs)
        except ValidationError as ex:
            logger.error(ex)
            return EXIT_VALIDATION
        except HierarchyDivergenceError as ex:
            logger.error(ex)
            return EXIT_DIVERGENCE
        except VerificationFailedError as ex:
            logger.error(ex)
            return EXIT_VERIFICATION
        except ValueError as ex:
            logger.error(ex)
            return EXIT_ERROR
        except FileNotFoundError as ex:
            logger.error(ex)
            return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main(args=None))
