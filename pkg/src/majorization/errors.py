"""Exception types shared across the package.

Decision procedures return booleans; exceptions are reserved for invalid
inputs, failed preconditions of synthesis routines, and numerical breakdown.
"""


class MajorizationError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MajorizationError, ValueError):
    """Input outside the mathematical domain of an operation."""


class InputError(DomainError):
    """Malformed serialized input; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class PreconditionError(DomainError):
    """A documented precondition of an operation does not hold."""


class NotSubmajorized(MajorizationError):
    pass


class NotMajorized(MajorizationError):
    pass


class NotExtendable(MajorizationError):
    """No doubly stochastic map can realize the requested transformation."""


class NotConvertible(MajorizationError):
    pass


class MalformedProtocol(DomainError):
    pass


class NumericalError(MajorizationError):
    """A computed object failed its own post-condition check."""


class BirkhoffResidual(NumericalError):
    pass
