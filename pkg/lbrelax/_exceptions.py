"""Exception hierarchy shared by every lbrelax module."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from ._exact import BnbResult


class LbRelaxError(Exception):
    """Base class for all errors raised by lbrelax."""


class InvalidInstanceError(LbRelaxError, ValueError):
    """Instance data that cannot form a binary ILP."""


class InfeasibleIncumbentError(LbRelaxError):
    """A solution that had to be feasible violates a constraint.

    Parameters
    ----------
    message : str
        Human readable description.
    row : int or None
        Index of the first violated row, if known.
    violation : float
        Magnitude of the violation of ``row``.
    """

    def __init__(self, message: str, row: int | None = None, violation: float = 0.0):
        super().__init__(message)
        self.row = row
        self.violation = violation


class InfeasibleFixingError(InfeasibleIncumbentError):
    """Fixing variables left a constant row that is violated."""


class NoSolutionError(LbRelaxError):
    """No feasible solution was found within the given budget."""

    def __init__(self, message: str, result: BnbResult | None = None):
        super().__init__(message)
        self.result = result


class MpsParseError(LbRelaxError, ValueError):
    """MPS input outside the supported subset.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int
        1-based line number of the offending line.
    token : str or None
        Offending token, if a single token is to blame.
    """

    def __init__(self, message: str, line: int, token: str | None = None):
        location = f"line {line}: {message}"
        if token is not None:
            location += f" (token {token!r})"
        super().__init__(location)
        self.line = line
        self.token = token


class ResultsFormatError(LbRelaxError, ValueError):
    """A results file line that cannot be decoded."""

    def __init__(self, message: str, path: Any = None, line: int | None = None):
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
        self.path = path
        self.line = line
