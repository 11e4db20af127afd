"""Exception hierarchy for the toolkit.

Every error raised by public API functions is one of these classes, so
callers (and the CLI) can map failures to stable categories.
"""


class OneClassError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(OneClassError, ValueError):
    """Array dimensions are inconsistent with the operation."""


class ParameterError(OneClassError, ValueError):
    """A configuration value is outside its valid range."""


class InputError(OneClassError, ValueError):
    """Input data is invalid (non-finite, bad labels, empty, ...)."""


class UsageError(OneClassError, RuntimeError):
    """API misuse, e.g. a stale cache or scoring before fitting."""


class NotFittedError(UsageError):
    """An estimator method requiring a fitted model was called before fit."""


class NumericalError(OneClassError, ArithmeticError):
    """A numerical routine failed, e.g. Cholesky on a non-SPD matrix."""


class ConvergenceError(OneClassError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(OneClassError, RuntimeError):
    """Training produced a non-finite loss."""


class ParseError(OneClassError, ValueError):
    """A file could not be parsed (bad magic, truncation, malformed line)."""


class FormatError(ParseError):
    """A file parsed but violates the format contract (e.g. ragged rows).

    Subclass of ParseError so generic parse handling still catches it.
    """


class ProtocolError(OneClassError, ValueError):
    """A benchmark protocol cannot be built from the given data."""
