"""Exception types raised by the simulator."""

from typing import Optional


class VragtError(Exception):
    """Base class for all simulator errors."""


class InvalidTopologyError(VragtError, ValueError):
    """Graph cannot be built with the requested parameters."""


class InvalidInputError(VragtError, ValueError):
    """Arguments have the wrong shape, range or index."""


class InvalidConfigurationError(VragtError, ValueError):
    """Parameter values are outside the range an update step accepts."""


class UnsupportedConfigurationError(VragtError):
    """A validator was asked to reason about a form it does not handle."""


class NumericalFailureError(VragtError):
    """An iterative or direct solver failed to reach the required accuracy."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(VragtError):
    """The iterate left the finite range during a run."""

    def __init__(self, message: str, k: int):
        super().__init__(message)
        self.k = k


class InsufficientDataError(VragtError):
    """Too few checkpoints to fit a rate."""


class ConfigError(VragtError):
    """Configuration file is missing, malformed or fails schema checks."""


class ValidationFailedError(VragtError):
    """One or more theory preconditions failed and no override was given."""
