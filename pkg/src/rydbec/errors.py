"""Exception hierarchy shared by the library and the CLI."""


class RydbecError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RydbecError, ValueError):
    """Input violates a documented precondition."""


class DimensionError(ValidationError):
    """Inconsistent subsystem dimensions or indices."""


class NumericalError(RydbecError, ArithmeticError):
    """A numerical procedure failed or produced an unphysical result."""


class TruncationError(NumericalError):
    """Fock cutoff too small for the requested state or trajectory."""

    def __init__(self, message, tail_weight=None, time=None):
        super().__init__(message)
        self.tail_weight = tail_weight
        self.time = time


class IntegrationDiverged(NumericalError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
