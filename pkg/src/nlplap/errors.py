"""Exception hierarchy shared by all modules."""


class NlplapError(Exception):
    """Base class for every error raised by the package."""


class DomainError(NlplapError, ValueError):
    """A time value or grid index lies outside the set where an operation is defined."""


class InvalidProblem(NlplapError, ValueError):
    """A problem parameter violates its constraints.

    ``pointer`` is a JSON pointer (RFC 6901) to the offending field when the
    problem was loaded from a document, e.g. ``"/beta"``.
    """

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer

    def __str__(self):
        msg = super().__str__()
        return f"{self.pointer}: {msg}" if self.pointer else msg


class HypothesisViolation(NlplapError, ValueError):
    """The nonlinearity is not strictly positive where it is evaluated."""


class DivergenceError(NlplapError, ArithmeticError):
    def __init__(self, message, iteration):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class SchemaError(InvalidProblem):
    """A problem document is structurally malformed (missing field, wrong type, unknown kind)."""
