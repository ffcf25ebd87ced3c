"""Exception types raised across the package."""


class GateboundError(Exception):
    """Base class for all gatebound errors."""


class DimensionMismatch(GateboundError, ValueError):
    """Operands have incompatible shapes."""


class DimensionLimitExceeded(GateboundError, ValueError):
    """Total dimension exceeds the dense-algebra cap."""


class NonHermitianInput(GateboundError, ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NotUnitary(GateboundError, ValueError):
    """A matrix required to be unitary is not, within tolerance."""


class NotAntiHermitian(GateboundError, ValueError):
    """A matrix required to be anti-Hermitian is not, within tolerance."""


class NotNormalized(GateboundError, ValueError):
    """A state vector is not unit norm, within tolerance."""


class EmptyInput(GateboundError, ValueError):
    """An operation received an empty collection."""


class GridMismatch(GateboundError, ValueError):
    """Averaging grid is incompatible with the control grid."""


class OutOfRange(GateboundError, ValueError):
    """A scalar argument lies outside its admissible range."""


class PreconditionViolated(GateboundError, RuntimeError):
    """A documented precondition of an operation does not hold.

    The message names the offending quantity and its value.
    """


class ParseError(GateboundError, ValueError):
    """A configuration document could not be parsed."""


class ValidationError(GateboundError, ValueError):
    """A parsed configuration failed validation; message carries the field path."""


class StageOneFailed(GateboundError, RuntimeError):
    """No optimizer restart reached the stage-switch fidelity threshold."""
