# Copyright (c) 2025 Matty Chalk
# Licensed under the MIT License (see LICENSE file for details)

"""Module defining the exception types raised by the simulator.

Each error carries the exit status the command-line tool reports for it.
"""


class CoilgunError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code: int = 1


class ConfigError(CoilgunError, ValueError):
    """A run configuration or solver setting is missing or invalid."""

    exit_code = 3


class GeometryError(CoilgunError, ValueError):
    """A winding profile does not fit the tube it is wound on."""

    exit_code = 4


class PulseParseError(CoilgunError, ValueError):
    """A pulse-profile string could not be parsed.

    Parameters
    ----------
    message : str
        Description of the problem.
    token_index : int
        1-based index of the offending token.
    """

    exit_code = 5

    def __init__(self, message: str, token_index: int) -> None:
        super().__init__(f"token {token_index}: {message}")
        self.token_index = token_index


class DomainError(CoilgunError, ValueError):
    """A formula was evaluated outside the region where it is defined."""

    exit_code = 6


class BudgetError(CoilgunError, ValueError):
    """A search would need more launches than the configured budget."""

    exit_code = 7


class AuditError(CoilgunError, ValueError):
    """An energy audit found an unphysical result."""

    exit_code = 8


class IngestionError(CoilgunError, ValueError):
    """A measured current log could not be ingested.

    Parameters
    ----------
    message : str
        Description of the problem.
    row : int, optional
        1-based line number in the file, header included. Default is None.
    """

    exit_code = 9

    def __init__(self, message: str, row: int | None = None) -> None:
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class UnknownPresetError(CoilgunError, LookupError):
    """No winding preset exists under the requested name."""

    exit_code = 10
