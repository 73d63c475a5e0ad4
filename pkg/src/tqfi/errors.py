"""Exception and warning types.

Input problems derive from :class:`InputError` (bad shapes, non-Hermitian or
non-positive matrices, malformed instances). Failures of a numerical procedure
on valid input derive from :class:`NumericalError`. The CLI maps the two
families to distinct exit codes.
"""


class TQFIError(Exception):
    """Base class for every error raised by this package."""


class InputError(TQFIError, ValueError):
    """The caller supplied something outside an operation's domain."""


class NumericalError(TQFIError, ArithmeticError):
    """A numerical procedure could not deliver a trustworthy value."""


class DimensionMismatch(InputError):
    pass


class NonHermitianInput(InputError):
    pass


class NotPSD(InputError):
    pass


class InvalidRank(InputError):
    pass


class TraceExceedsOne(InputError):
    pass


class NotAProjector(InputError):
    pass


class InstanceSchemaError(InputError):
    """An instance file does not follow the instance JSON schema."""


class TruncationNotStrict(NumericalError):
    """The closed form was asked for a cut at or beyond the probe rank."""


class DeltaTooLarge(NumericalError):
    """A finite-difference step violates the series-validity guard."""


class NonConvergent(NumericalError):
    """Successive Richardson extrapolants disagree beyond tolerance."""


class DegenerateCut(UserWarning):
    """The top-m eigenspace is not unique (tie across the cut)."""
