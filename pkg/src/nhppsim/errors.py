"""Exception types raised by the samplers."""


class NHPPError(Exception):
    """Base class for all package errors."""


class DomainError(NHPPError, ValueError):
    """An argument lies outside the domain of the operation."""


class ImpossibleConditionError(NHPPError, ValueError):
    """Conditioning on an event of probability zero (e.g. >= 1 event with zero mass)."""


class MajorizationError(NHPPError, ValueError):
    """The supplied majorizer is smaller than the intensity at a proposal."""

    def __init__(self, time, value, bound, row=None):
        self.time = time
        self.value = value
        self.bound = bound
        self.row = row
        where = f"row {row}, " if row is not None else ""
        super().__init__(
            f"majorizer violated at {where}t={time!r}: lambda={value!r} > lambda*={bound!r}"
        )


class BracketError(NHPPError, ValueError):
    """The inversion target is outside the range of the cumulative intensity."""


class NumericError(NHPPError, ArithmeticError):
    """A numerical routine failed to converge."""
