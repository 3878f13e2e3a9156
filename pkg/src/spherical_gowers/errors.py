"""Exception types shared across the package."""


class SphericalGowersError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SphericalGowersError, ValueError):
    """Operands have incompatible shapes."""


class BudgetError(SphericalGowersError, MemoryError):
    """An enumeration or search would exceed the configured budget.

    ``required`` carries the resource estimate (points, tuples or bytes,
    as described by ``unit``).
    """

    def __init__(self, message, required=None, unit="items"):
        super().__init__(message)
        self.required = required
        self.unit = unit


class DomainError(SphericalGowersError, ValueError):
    """An average over an empty set was requested."""


class PreconditionError(SphericalGowersError, ValueError):
    """A documented precondition does not hold and was not overridden."""


class MalformedDataError(SphericalGowersError, ValueError):
    """Input data violates its declared invariants."""
