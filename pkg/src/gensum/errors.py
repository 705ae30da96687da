"""Exception hierarchy shared by every module of the package."""


class GensumError(Exception):
    """Base class for all errors raised by gensum."""


class PreconditionError(GensumError, ValueError):
    """An argument violates the documented precondition of an operation."""


class InvalidSummandError(GensumError, ValueError):
    """A summand's designated Hamiltonian order is not a Hamiltonian cycle."""


class MalformedOrientationError(GensumError, ValueError):
    """An orientation does not carry exactly one bit per cross-summand pair."""


class TooLargeError(GensumError):
    """An exhaustive enumeration exceeds the configured bit cap."""


class UnsupportedArityError(GensumError):
    """An operation defined only for two summands was given some other k."""


class NotStrongError(PreconditionError):
    """The instance is not strongly connected, so no theorem applies."""


class WrongCaseError(GensumError):
    """A k-summand construction was requested for the wrong proof case."""
