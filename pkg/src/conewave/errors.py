"""Exception hierarchy for conewave."""

from __future__ import annotations


class ConewaveError(Exception):
    """Base class for all library errors."""


class ParameterError(ConewaveError, ValueError):
    """Invalid or inconsistent input parameters."""


class SpectrumParseError(ConewaveError, ValueError):
    """A spectrum file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericError(ConewaveError, ArithmeticError):
    """An iterative or quadrature routine failed to reach its tolerance."""


class WallShadowError(ConewaveError):
    """Evolution would let the artificial Dirichlet wall influence the solution."""


class TruncationError(ConewaveError):
    """The spectral truncation is too small for the requested quantity."""


class EstimatorError(ConewaveError):
    """A regularity estimate cannot be formed with the requested settings."""
