"""
Exception hierarchy for thorp_mixing.

Every error raised on purpose by the package derives from ThorpError.
Input problems are DomainError (also a ValueError, so callers that only
know about ValueError keep working); the CLI maps them to exit code 2.
InvariantViolation marks a property that failed while a run was checking
it and maps to exit code 1.
"""


class ThorpError(Exception):
    """Base class for all thorp_mixing errors."""


class DomainError(ThorpError, ValueError):
    """Argument outside the domain of an operation."""


class CapacityError(DomainError):
    """
    Exact computation refused because it would exceed a hard size limit.

    Attributes:
        bound (str): Human readable name of the limit that was hit.
    """

    def __init__(self, message, bound):
        super().__init__(f"{message} (limit: {bound})")
        self.bound = bound


class OracleDomainError(DomainError, KeyError):
    """Tabular oracle queried outside its enumerated (l, t) table."""

    def __str__(self):
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class UndefinedRatioError(DomainError):
    """A ratio with zero denominator was requested (e.g. dent ratio at uniform)."""


class TraceHorizonError(DomainError):
    """A lookup needed a round the trajectory does not cover."""


class InvariantViolation(ThorpError):
    """A checked invariant failed during a run."""
