"""Simulation toolkit for a three-stage Josephson travelling-wave amplifier
with a reflectionless high-pass filter between the gain stages."""

__version__ = "0.1.0"

from .errors import (CalibrationError, ConditioningError, ConfigError, ConvergenceError,
                     CutoffError, DomainError, FrustrationError, GridMismatchError,
                     LeakageError, MtwpaError, NumericalError)

__all__ = [
    "__version__", "MtwpaError", "DomainError", "FrustrationError", "CutoffError",
    "GridMismatchError", "ConditioningError", "ConfigError", "NumericalError",
    "ConvergenceError", "LeakageError", "CalibrationError",
]
