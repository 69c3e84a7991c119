"""Exception types shared across the toolkit."""


class TtkitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(TtkitError, ValueError):
    """Shapes, axes, or factorizations are inconsistent."""


class NetworkError(TtkitError, ValueError):
    """A contraction network violates its wiring invariants."""


class NumericalError(TtkitError, ValueError):
    """Non-finite values or a failed numerical routine."""


class CapacityError(TtkitError, RuntimeError):
    """An operation would materialize more elements than its configured cap."""


class InfeasibilityError(TtkitError, RuntimeError):
    """Constraint layers eliminated every configuration."""
