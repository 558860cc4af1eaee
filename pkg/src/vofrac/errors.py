"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range an operation is defined on."""


class PreconditionError(ValueError):
    """Inputs are well-typed but do not satisfy an operation's precondition."""


class ProblemDataError(ValueError):
    """Coefficient or boundary data violate the bounds the scheme requires."""


class SingularSystemError(ArithmeticError):
    """A tridiagonal elimination met a zero or near-zero pivot."""


class NumericalFailure(RuntimeError):
    """A march step failed; carries the offending time level."""

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level
