"""Exception hierarchy shared by all modules."""


class QmphaseError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(QmphaseError, ValueError):
    """A model parameter or argument is outside its allowed domain."""


class DegenerateStateError(QmphaseError, ValueError):
    """A conditioned state carries (numerically) zero probability weight."""


class SizeLimitError(QmphaseError, ValueError):
    """An exponential-cost oracle was asked for a system that is too large."""


class NumericError(QmphaseError, ArithmeticError):
    """A computed probability went negative beyond roundoff tolerance."""


class PoleError(QmphaseError, ZeroDivisionError):
    """A closed-form expression was evaluated at one of its poles."""


class ResolutionError(QmphaseError, ValueError):
    """A scan does not resolve enough structure for the requested estimate."""
