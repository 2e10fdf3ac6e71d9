"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, user
can fix it) and :class:`NumericalError` (the model itself failed at the
requested point). The command line maps them to distinct exit codes.
"""


class OptoampError(Exception):
    """Base class for all package errors."""


class ValidationError(OptoampError, ValueError):
    """A parameter or configuration value violates an invariant."""

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class ParseError(ValidationError):
    """Malformed configuration text."""


class NonFiniteValue(ValidationError):
    """NaN or Inf reached a numerical kernel."""


class NegativeCoupling(ValidationError):
    pass


class DegenerateCoupling(ValidationError):
    pass


class ConditionsNotApplied(ValidationError):
    """Parameters do not satisfy the directional-amplification conditions."""


class NumericalError(OptoampError, ArithmeticError):
    """The model could not be evaluated at the requested point."""


class SingularMatrix(NumericalError):
    pass


class SingularAtFrequency(SingularMatrix):
    def __init__(self, omega, message=None):
        self.omega = omega
        super().__init__(message or f"M + i*omega*I is singular at omega = {omega!r} rad/us")


class NoConvergence(NumericalError):
    pass


class GridTooSmall(NumericalError, ValueError):
    pass


class DivergentGain(NumericalError):
    """Resonant gain denominator vanishes (stability boundary)."""


class ZeroGain(NumericalError):
    pass


class PhaseUndefined(NumericalError):
    pass


class SearchBracketFailure(NumericalError):
    pass


class NotFound(NumericalError):
    pass


class UnstableParameters(NumericalError):
    pass


class IoError(OptoampError, OSError):
    """Dataset or config file could not be read or written."""
