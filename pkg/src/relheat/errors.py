"""Exceptions raised from within relheat.

All exceptions are rooted at [relheat.errors.RootException][], so
you can catch it to implement error handling behavior associated with
this library's functionality.  Most of them also derive from the
builtin exception that they specialise so that ``except ValueError``
continues to work for argument errors.

"""

from __future__ import annotations


class RootException(Exception):
    """Root of the ``relheat`` exception hierarchy."""


class DomainError(RootException, ValueError):
    """Argument outside of the supported mathematical domain."""


class SingularOrigin(DomainError):
    """Aharonov-Bohm quantity requested at the singular point."""


class GridTooCoarse(DomainError):
    """Radial grid does not have enough cells."""

    def __init__(self, cells: int, minimum: int) -> None:
        super().__init__(
            f'radial grid needs at least {minimum} cells, got {cells}'
        )
        self.cells = cells
        self.minimum = minimum


class BoundRangeError(DomainError):
    """Bound evaluated outside of the time range where it holds."""


class ConvergenceFailure(RootException, ArithmeticError):
    """Series or quadrature did not reach the requested tolerance.

    :param message: human readable description
    :param estimate: best value that was computed
    :param achieved: error estimate or residual that was reached

    """

    def __init__(
        self, message: str, *, estimate: float, achieved: float
    ) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class IntegrandError(ConvergenceFailure):
    """Integrand returned a non-finite value."""


class UnsupportedProfile(RootException, TypeError):
    """Operation is not defined for this kind of field profile."""


class EmptySampleSet(RootException, ValueError):
    """No samples were available to fit or verify."""


class MalformedConfig(RootException, ValueError):
    """Run configuration could not be parsed or validated.

    :param line_number: one-based line of the offending entry or
        [None][] when the problem is not tied to a single line
    :param field: ``section.key`` name of the offending field

    """

    def __init__(
        self, message: str, *, line_number: int | None, field: str
    ) -> None:
        location = f'line {line_number}: ' if line_number else ''
        super().__init__(f'{location}{field}: {message}')
        self.line_number = line_number
        self.field = field


class MalformedCSV(RootException, ValueError):
    """Kernel CSV input could not be parsed."""

    def __init__(self, message: str, *, row_number: int) -> None:
        super().__init__(f'row {row_number}: {message}')
        self.row_number = row_number


class CutoffInsufficient(UserWarning):
    """Partial-wave tail exceeds the requested tolerance."""


class ToleranceNotReached(UserWarning):
    """Quadrature returned its best estimate short of the tolerance."""
