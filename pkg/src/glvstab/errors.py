"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class GlvError(Exception):
    exit_code = 1


class ValidationError(GlvError, ValueError):
    """Invalid input: bad parameters, malformed files."""

    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DomainError(ValidationError):
    """State outside the open positive quadrant."""


class PreconditionError(GlvError):
    exit_code = 2


class ZipCaseError(PreconditionError):
    """det C = 0: continuum or absence of equilibria, not analyzed here."""


class NumericalFailure(GlvError):
    """Step-size underflow, failed certificate search and similar."""

    exit_code = 3
