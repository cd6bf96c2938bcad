"""Exception hierarchy shared by all porofrac modules."""


class PorofracError(Exception):
    """Base class for every error raised by porofrac."""


class ConfigError(PorofracError, ValueError):
    """Invalid material parameters or scenario configuration."""


class InvalidInputError(PorofracError, ValueError):
    """Non-finite or malformed numerical input."""


class ReturnMapError(PorofracError):
    """Local Newton iteration of the return map did not converge."""

    def __init__(self, message, residual=None, point=None):
        super().__init__(message)
        self.residual = residual
        self.point = point


class NumericalError(PorofracError):
    """NaN or overflow encountered inside an iteration."""


class ElementQualityError(PorofracError):
    """Degenerate or inverted element geometry."""


class AssemblyError(PorofracError):
    """Singular element or global system during assembly."""


class StepFailure(PorofracError):
    """A load/time step could not be completed."""

    def __init__(self, message, step=None, history=None):
        super().__init__(message)
        self.step = step
        self.history = history or []
