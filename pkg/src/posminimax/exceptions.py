"""Exception classes raised by posminimax."""


class DimensionError(ValueError):
    """Operands have inconsistent shapes.

    ``operands`` holds the names of the two quantities that disagree.
    """

    def __init__(self, message, operands=()):
        super().__init__(message)
        self.operands = tuple(operands)


class ProblemFormatError(ValueError):
    """A problem or network file could not be parsed."""

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class InvariantViolation(RuntimeError):
    """An internal invariant failed; usually a sign of an unchecked instance."""


class LimitExceeded(ValueError):
    """A brute-force enumeration would exceed its configured limit."""


class StructuralInfeasibilityError(ValueError):
    """Constraint structure does not fit the network topology.

    ``entries`` lists ``(i, j, value, bound)`` tuples, 0-based.
    """

    def __init__(self, message, entries=()):
        super().__init__(message)
        self.entries = list(entries)


class InfeasibleProblemError(ValueError):
    """Assembly refused because a standing condition fails.

    The failing :class:`~posminimax.model.ValidationReport` is kept on
    ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
