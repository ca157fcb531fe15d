"""Exception hierarchy shared by every module in the package.

All package errors derive from :class:`StegcapError` so callers can catch
one type at an API boundary.  Most also derive from the closest builtin
(``ValueError``/``RuntimeError``) so they behave sensibly in generic code.
"""


class StegcapError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(StegcapError, ValueError):
    """An input lies outside the mathematical domain of the operation."""


class ConvergenceError(StegcapError, RuntimeError):
    """An iterative solver exhausted its iteration budget before reaching
    the requested tolerance."""


class DimensionMismatch(StegcapError, ValueError):
    """Two objects that must share a dimension do not."""


class NotPositiveDefinite(StegcapError, ValueError):
    """A matrix required to be symmetric positive definite is not.

    Degenerate input is reported, never silently regularized.
    """


class EmptySample(StegcapError, ValueError):
    """An empirical estimator received no samples."""


class InvalidState(StegcapError, ValueError):
    """A field configuration is inconsistent with its model specification
    (missing site, value outside the alphabet, ...)."""


class StateSpaceTooLarge(StegcapError, ValueError):
    """Exhaustive enumeration was requested for a state space above the
    supported cap."""


class DegenerateMessage(StegcapError, ValueError):
    """The optimal message distribution collapses to a point mass
    (zero covariance), so no codebook can be built from it."""


class BudgetExceeded(StegcapError, ValueError):
    """A requested experiment exceeds a hard resource cap (trial count,
    codebook size, or dense dimension)."""


class SchemaError(StegcapError, ValueError):
    """A data file does not match its published schema.

    Carries enough position information to name the offending cell.
    """

    def __init__(self, message: str, *, line: int | None = None,
                 column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
