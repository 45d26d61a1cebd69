"""Exception types shared across the package."""


class MtwpaError(Exception):
    """Base class for all package errors."""


class DomainError(MtwpaError, ValueError):
    """An input lies outside the domain of a formula."""


class FrustrationError(DomainError):
    """The SQUID inductance denominator is nonpositive: no linear mode propagates."""


class CutoffError(DomainError):
    """A frequency sits at or above the ladder's divergence frequency."""


class GridMismatchError(MtwpaError, ValueError):
    """Two responses were combined on different frequency grids."""


class ConditioningError(MtwpaError, ValueError):
    """A least-squares problem is too poorly conditioned to trust."""


class ConfigError(MtwpaError, ValueError):
    """A configuration failed validation."""


class NumericalError(MtwpaError, RuntimeError):
    """A numerical procedure failed to converge."""


class ConvergenceError(NumericalError):
    """Newton iteration in the transient solver did not converge."""

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class LeakageError(NumericalError):
    """A tone does not fall on an FFT bin of the recorded window."""


class CalibrationError(NumericalError):
    """Requested gain cannot be reached inside the allowed nonlinear phase."""
