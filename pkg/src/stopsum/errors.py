"""Exception taxonomy shared across the package.

ValidationError maps to CLI exit code 2, BudgetError to exit code 3.
"""


class StopsumError(Exception):
    """Base class for all package errors."""


class ValidationError(StopsumError, ValueError):
    """Invalid parameter, malformed input, or unmet precondition."""


class DegenerateLawError(ValidationError):
    """Operation undefined for a degenerate (point-mass) law."""


class SpanError(ValidationError):
    """Lattice span differs from 1 where aperiodicity is required."""


class DivergentMomentError(ValidationError):
    """Requested moment does not exist for the given tail exponent."""


class BudgetError(StopsumError):
    """A result would exceed its declared error budget; refused.

    Carries the offending size estimate when the refusal is about work
    volume rather than numerical error.
    """

    def __init__(self, *args, estimate=None):
        super().__init__(*args)
        self.estimate = estimate


class SupportOverflowError(StopsumError):
    """Requested support exceeds the in-memory size budget."""


class QuadratureError(StopsumError):
    """Numerical quadrature failed to reach its tolerance."""
