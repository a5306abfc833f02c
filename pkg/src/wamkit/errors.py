"""Exception types raised across the package.

Two families matter to callers: :class:`ValidationError` subclasses mean the
inputs were rejected before any real work happened, while
:class:`ComputationError` subclasses mean a numerically plausible input broke
down mid-computation. The CLI maps the families to exit codes 2 and 3.
"""


class WamkitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WamkitError):
    """Input rejected by a precondition check."""


class ComputationError(WamkitError):
    """Computation failed on input that passed validation."""


class InvalidInput(ValidationError):
    """Malformed argument: wrong shape, non-finite entries, bad flag value."""


class DimMismatch(ValidationError):
    """Operands carry incompatible dimensions."""


class InsufficientSamples(ValidationError):
    """Too few rows for the requested estimate."""


class InvalidMarginals(ValidationError):
    """Weight vectors are not probability vectors within tolerance."""


class InsufficientCurve(ValidationError):
    """Too few curve points remain after the skip prefix to locate a knee."""


class UnknownFormat(ValidationError):
    """File does not start with a recognized magic or format tag."""


class Truncated(ValidationError):
    """File ends before the payload its header promises.

    Carries the expected and actual byte counts.
    """

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"truncated file: expected {expected} bytes, got {got}")


class InvalidModel(ValidationError):
    """Model file violates its schema; the message names the offending field."""


class DivisionDomain(ValidationError):
    """Ratio requested with a zero or negative denominator."""


class NotPositiveSemidefinite(ComputationError):
    """Matrix has a negative eigenvalue beyond the clamping tolerance."""


class DegenerateComponent(ComputationError):
    """A mixture component collapsed during fitting (singular covariance)."""

    def __init__(self, component: int, message: str = ""):
        self.component = component
        detail = message or "covariance became singular"
        super().__init__(f"component {component}: {detail}")


class NumericalError(ComputationError):
    """Cancellation or overflow produced an out-of-domain intermediate."""
