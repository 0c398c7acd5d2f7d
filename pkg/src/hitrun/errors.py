"""Exception hierarchy shared by the library and the CLI."""


class HitRunError(Exception):
    """Base class for all errors raised by :mod:`hitrun`."""


class ValidationError(HitRunError, ValueError):
    """Invalid input: wrong shape, bad configuration, broken invariant on entry."""


class ShapeError(ValidationError):
    """Matrix or vector dimensions do not agree."""


class NumericalError(HitRunError, ArithmeticError):
    """A numerical routine failed or produced an unusable result."""


class InvariantViolation(NumericalError):
    """A chain left the body it is supposed to stay in."""
