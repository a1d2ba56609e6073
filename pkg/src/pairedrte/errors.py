"""Exception and warning types shared across the package."""


class PairedRteError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(PairedRteError):
    """Input data violates a domain constraint (negative time, bad indicator, ...)."""


class ParseError(PairedRteError):
    """A CSV cell could not be parsed. Carries row/column context."""

    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"row {row}, column {column!r}: {reason}")


class NonFiniteTime(ValidationError):
    """A time coordinate is NaN or infinite."""


class NonPositiveTau(ValidationError):
    """The follow-up horizon must be strictly positive."""


class JitterTooLarge(ValidationError):
    """Tie-breaking jitter would reorder event times relative to censoring times."""


class EmptyDataset(PairedRteError):
    """An operation requires at least one record."""


class NotFullyObserved(PairedRteError):
    """Operation is only defined for data without censoring."""


class DegenerateVariance(PairedRteError):
    """The variance estimate carries no information (too few events to studentize)."""


class InsufficientReplicates(PairedRteError):
    """Too few resampling replicates to estimate the requested quantile."""


class ThetaOutOfDomain(PairedRteError):
    """The log-log transform needs an effect estimate strictly inside (0, 1)."""


class InvalidParameter(PairedRteError):
    """A distribution or copula parameter is outside its valid range."""


class BracketError(PairedRteError):
    """Calibration bracket does not enclose the target value."""


class QuantileDomain(PairedRteError):
    """A probability hit the boundary of the quantile function's domain."""


class ScenarioError(ValidationError):
    """A simulation scenario file or dict is malformed. Carries the field path."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"scenario field {field!r}: {reason}")


class DegenerateRiskWarning(UserWarning):
    """The at-risk set is exhausted before the horizon; curves are flat beyond it."""


class NonMonotoneWarning(UserWarning):
    """Calibration target does not appear monotone over the search bracket."""
