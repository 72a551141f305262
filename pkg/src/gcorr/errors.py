"""Exception hierarchy shared by every module."""


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class DimensionMismatch(ContractViolation):
    pass


class NoClosedFormSupport(ContractViolation):
    """The body has no closed-form support function (polytopes, intersections)."""


class ContainmentError(ContractViolation):
    """A body is not contained in the ball a check requires."""

    def __init__(self, message, radius=None, limit=None):
        super().__init__(message)
        self.radius = radius
        self.limit = limit


class DimensionCapError(ContractViolation):
    """Requested dimension exceeds the enumeration/desk-scale cap."""


class AccuracyError(RuntimeError):
    """Requested accuracy not reached; ``best`` carries the best value found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BodyParseError(ValueError):
    """Malformed body JSON; the message names the offending key."""
