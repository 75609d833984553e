"""Exception types shared across the package."""


class MpstomoError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(MpstomoError):
    """Operands have incompatible site counts or physical dimensions."""


class BasisMismatchError(MpstomoError):
    """Operands use different local operator bases."""


class DegenerateStateError(MpstomoError):
    """An operation hit a state with (numerically) vanishing trace or norm."""


class StateValidityError(MpstomoError):
    """A state produced probabilities that are not physically plausible."""


class ParameterError(MpstomoError):
    """An argument is outside its documented domain."""


class CapabilityError(MpstomoError):
    """A dense-path operation was requested beyond its size limit."""


class CompressionAbort(MpstomoError):
    """Compression converged above the configured error threshold.

    Carries the report of the failed run so callers can surface partial
    diagnostics.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
